#include "ganshm/neural.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "binio.hpp"
#include "ganshm/errors.hpp"
#include "ganshm/rng.hpp"

namespace ganshm {

namespace {

constexpr std::uint64_t kMlpMagic = binio::magic("GSHM-MLP");
constexpr std::uint64_t kMlpVersion = 1;

double sigmoid(double z) {
  // Split on sign so exp() never overflows.
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd apply_activation(const DenseLayer& layer, const Eigen::MatrixXd& z) {
  switch (layer.activation) {
    case Activation::kLinear:
      return z;
    case Activation::kLeakyRelu: {
      const double slope = layer.act_param;
      return z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
    }
    case Activation::kSigmoid:
      return z.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::kScaledSigmoid: {
      const double scale = layer.act_param;
      return z.unaryExpr([scale](double v) { return scale * sigmoid(v); });
    }
  }
  throw InvalidState("unknown activation");
}

// Derivative of the activation w.r.t. its pre-activation, given both.
Eigen::MatrixXd activation_derivative(const DenseLayer& layer, const Eigen::MatrixXd& z,
                                      const Eigen::MatrixXd& y) {
  switch (layer.activation) {
    case Activation::kLinear:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::kLeakyRelu: {
      const double slope = layer.act_param;
      return z.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
    }
    case Activation::kSigmoid:
      return (y.array() * (1.0 - y.array())).matrix();
    case Activation::kScaledSigmoid: {
      const double scale = layer.act_param;
      // y = c*s  =>  dy/dz = c*s*(1-s) = y*(1 - y/c)
      return (y.array() * (1.0 - y.array() / scale)).matrix();
    }
  }
  throw InvalidState("unknown activation");
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.biases.size());
  }
  return n;
}

Mlp init_mlp(int input_dim, const std::vector<LayerSpec>& layers, std::uint64_t seed) {
  if (input_dim <= 0 || layers.empty()) {
    throw InvalidParameter("init_mlp needs a positive input dim and at least one layer");
  }
  Rng rng(seed);
  Mlp net;
  int fan_in = input_dim;
  for (const auto& spec : layers) {
    if (spec.units <= 0) {
      throw InvalidParameter("layer size must be positive");
    }
    DenseLayer layer;
    layer.activation = spec.activation;
    layer.act_param = spec.act_param;
    layer.weights.resize(spec.units, fan_in);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + spec.units));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = rng.uniform(-bound, bound);
      }
    }
    layer.biases = Eigen::VectorXd::Zero(spec.units);
    net.layers.push_back(std::move(layer));
    fan_in = spec.units;
  }
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& batch, ForwardCache* cache) {
  if (net.layers.empty()) {
    throw InvalidState("forward on an empty network");
  }
  if (batch.cols() != net.input_dim()) {
    throw InvalidParameter("batch width " + std::to_string(batch.cols()) +
                           " does not match network input dim " +
                           std::to_string(net.input_dim()));
  }
  if (cache != nullptr) {
    cache->input = batch;
    cache->pre_activations.clear();
    cache->activations.clear();
    cache->pre_activations.reserve(net.layers.size());
    cache->activations.reserve(net.layers.size());
  }
  Eigen::MatrixXd x = batch;
  for (const auto& layer : net.layers) {
    Eigen::MatrixXd z = x * layer.weights.transpose();
    z.rowwise() += layer.biases.transpose();
    Eigen::MatrixXd y = apply_activation(layer, z);
    if (cache != nullptr) {
      cache->pre_activations.push_back(z);
      cache->activations.push_back(y);
    }
    x = std::move(y);
  }
  return x;
}

Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& loss_gradient, Eigen::MatrixXd* input_gradient) {
  const std::size_t n_layers = net.layers.size();
  if (cache.pre_activations.size() != n_layers || cache.activations.size() != n_layers) {
    throw InvalidState("forward cache does not match network depth");
  }
  if (cache.input.cols() != net.input_dim()) {
    throw InvalidState("forward cache input width does not match network");
  }
  if (loss_gradient.rows() != cache.input.rows() ||
      loss_gradient.cols() != net.output_dim()) {
    throw InvalidState("loss gradient shape does not match forward output");
  }

  Gradients grads;
  grads.layers.resize(n_layers);

  Eigen::MatrixXd delta = loss_gradient;
  for (std::size_t i = n_layers; i-- > 0;) {
    const DenseLayer& layer = net.layers[i];
    const Eigen::MatrixXd& z = cache.pre_activations[i];
    const Eigen::MatrixXd& y = cache.activations[i];
    if (z.rows() != delta.rows() || z.cols() != delta.cols()) {
      throw InvalidState("forward cache shape mismatch at layer " + std::to_string(i));
    }
    delta = delta.cwiseProduct(activation_derivative(layer, z, y));
    const Eigen::MatrixXd& below = (i == 0) ? cache.input : cache.activations[i - 1];
    grads.layers[i].weights = delta.transpose() * below;
    grads.layers[i].biases = delta.colwise().sum().transpose();
    if (i > 0 || input_gradient != nullptr) {
      Eigen::MatrixXd next = delta * layer.weights;
      if (i == 0) {
        *input_gradient = std::move(next);
      } else {
        delta = std::move(next);
      }
    }
  }
  return grads;
}

AdamState make_adam_state(const Mlp& net, const AdamConfig& config) {
  AdamState state;
  state.config = config;
  state.step = 0;
  state.first_moment.resize(net.layers.size());
  state.second_moment.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    state.first_moment[i].weights = Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols());
    state.first_moment[i].biases = Eigen::VectorXd::Zero(layer.biases.size());
    state.second_moment[i].weights = Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols());
    state.second_moment[i].biases = Eigen::VectorXd::Zero(layer.biases.size());
  }
  return state;
}

namespace {

template <typename Tensor>
void adam_update_impl(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                      std::int64_t t, const AdamConfig& config) {
  if (!grad.allFinite()) {
    throw TrainingDiverged("non-finite gradient in Adam update");
  }
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  m = b1 * m + (1.0 - b1) * grad;
  v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
  const double m_corr = 1.0 - std::pow(b1, static_cast<double>(t));
  const double v_corr = 1.0 - std::pow(b2, static_cast<double>(t));
  param.array() -=
      config.lr * (m.array() / m_corr) / ((v.array() / v_corr).sqrt() + config.eps);
}

}  // namespace

void adam_update(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, Eigen::MatrixXd& m,
                 Eigen::MatrixXd& v, std::int64_t t, const AdamConfig& config) {
  adam_update_impl(param, grad, m, v, t, config);
}

void adam_update(Eigen::VectorXd& param, const Eigen::VectorXd& grad, Eigen::VectorXd& m,
                 Eigen::VectorXd& v, std::int64_t t, const AdamConfig& config) {
  adam_update_impl(param, grad, m, v, t, config);
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  if (grads.layers.size() != net.layers.size() ||
      state.first_moment.size() != net.layers.size()) {
    throw InvalidState("Adam state/gradient layer count mismatch");
  }
  ++state.step;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    adam_update(net.layers[i].weights, grads.layers[i].weights, state.first_moment[i].weights,
                state.second_moment[i].weights, state.step, state.config);
    adam_update(net.layers[i].biases, grads.layers[i].biases, state.first_moment[i].biases,
                state.second_moment[i].biases, state.step, state.config);
  }
}

bool parameters_finite(const Mlp& net) {
  for (const auto& layer : net.layers) {
    if (!layer.weights.allFinite() || !layer.biases.allFinite()) return false;
  }
  return true;
}

void save_mlp(std::ostream& out, const Mlp& net) {
  binio::Writer w(out);
  w.u64(kMlpMagic);
  w.u64(kMlpVersion);
  w.u64(net.layers.size());
  for (const auto& layer : net.layers) {
    w.u64(static_cast<std::uint64_t>(layer.in_dim()));
    w.u64(static_cast<std::uint64_t>(layer.out_dim()));
    w.u64(static_cast<std::uint64_t>(layer.activation));
    w.f64(layer.act_param);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        w.f64(layer.weights(r, c));
      }
    }
    for (Eigen::Index i = 0; i < layer.biases.size(); ++i) {
      w.f64(layer.biases(i));
    }
  }
}

Mlp load_mlp(std::istream& in) {
  binio::Reader r(in);
  r.expect_magic(kMlpMagic, "network checkpoint");
  const std::uint64_t version = r.u64("checkpoint version");
  if (version != kMlpVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version),
                      static_cast<std::size_t>(r.offset() - 8));
  }
  const std::uint64_t n_layers = r.u64("layer count");
  Mlp net;
  net.layers.reserve(n_layers);
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    DenseLayer layer;
    const std::uint64_t in_dim = r.u64("layer input dim");
    const std::uint64_t out_dim = r.u64("layer output dim");
    const std::uint64_t act = r.u64("activation tag");
    if (act > static_cast<std::uint64_t>(Activation::kScaledSigmoid)) {
      throw FormatError("unknown activation tag " + std::to_string(act),
                        static_cast<std::size_t>(r.offset() - 8));
    }
    layer.activation = static_cast<Activation>(act);
    layer.act_param = r.f64("activation param");
    layer.weights.resize(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
    for (Eigen::Index row = 0; row < layer.weights.rows(); ++row) {
      for (Eigen::Index col = 0; col < layer.weights.cols(); ++col) {
        layer.weights(row, col) = r.f64("weights");
      }
    }
    layer.biases.resize(static_cast<Eigen::Index>(out_dim));
    for (Eigen::Index b = 0; b < layer.biases.size(); ++b) {
      layer.biases(b) = r.f64("biases");
    }
    if (!net.layers.empty() && net.layers.back().out_dim() != layer.in_dim()) {
      throw FormatError("inconsistent layer dims in checkpoint",
                        static_cast<std::size_t>(r.offset()));
    }
    net.layers.push_back(std::move(layer));
  }
  if (net.layers.empty()) {
    throw FormatError("checkpoint contains no layers", static_cast<std::size_t>(r.offset()));
  }
  return net;
}

void save_mlp_file(const std::string& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_mlp(out, net);
  if (!out) throw Error("write failed for " + path);
}

Mlp load_mlp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return load_mlp(in);
}

}  // namespace ganshm
