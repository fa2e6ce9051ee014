#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ganshm {

enum class Activation : std::uint8_t {
  kLinear = 0,
  kLeakyRelu = 1,      // param = negative-side slope
  kSigmoid = 2,
  kScaledSigmoid = 3,  // param = output scale c, range (0, c)
};

// Fully-connected layer, y = act(x W^T + b). Weights are out x in.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;
  Activation activation = Activation::kLinear;
  double act_param = 0.0;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

struct Mlp {
  std::vector<DenseLayer> layers;

  Eigen::Index input_dim() const { return layers.front().in_dim(); }
  Eigen::Index output_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

// Declarative layer description for init_mlp.
struct LayerSpec {
  int units = 0;
  Activation activation = Activation::kLeakyRelu;
  double act_param = 0.2;
};

// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
// Deterministic for a given seed.
Mlp init_mlp(int input_dim, const std::vector<LayerSpec>& layers, std::uint64_t seed);

// Everything backward() needs: the input batch plus per-layer pre-activations
// and activations from the forward pass that produced it.
struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre_activations;
  std::vector<Eigen::MatrixXd> activations;
};

// Batch forward pass; rows are samples. Fills *cache when given.
// Throws InvalidParameter on a batch-width mismatch.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& batch,
                        ForwardCache* cache = nullptr);

struct LayerGradients {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;
};

struct Gradients {
  std::vector<LayerGradients> layers;
};

// Reverse-mode gradients of the forward map composed with the given loss
// gradient (d loss / d output, same shape as the forward output). When
// input_gradient is non-null it also receives d loss / d input, which lets
// one network backpropagate into another. Throws InvalidState if the cache
// does not match the network.
Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& loss_gradient,
                   Eigen::MatrixXd* input_gradient = nullptr);

struct AdamConfig {
  double lr = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam accumulators for one network. The step counter is
// shared across layers and incremented once per adam_step call.
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<LayerGradients> first_moment;
  std::vector<LayerGradients> second_moment;
};

AdamState make_adam_state(const Mlp& net, const AdamConfig& config);

// One Adam update over all parameters. Throws TrainingDiverged if any
// gradient is non-finite.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// Single-tensor Adam update at step t (t >= 1); building block of adam_step,
// exposed for reuse and testing.
void adam_update(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, Eigen::MatrixXd& m,
                 Eigen::MatrixXd& v, std::int64_t t, const AdamConfig& config);
void adam_update(Eigen::VectorXd& param, const Eigen::VectorXd& grad, Eigen::VectorXd& m,
                 Eigen::VectorXd& v, std::int64_t t, const AdamConfig& config);

bool parameters_finite(const Mlp& net);

// Versioned binary checkpoint: header (magic, version, layer count), then per
// layer dims, activation tag and parameter, row-major weights and biases.
// All fields 64-bit little-endian.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);
void save_mlp_file(const std::string& path, const Mlp& net);
Mlp load_mlp_file(const std::string& path);

}  // namespace ganshm
