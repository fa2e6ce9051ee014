#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ganshm/neural.hpp"
#include "ganshm/rng.hpp"
#include "ganshm/signal.hpp"

namespace ganshm {

struct GanTrainConfig {
  int epochs = 5000;
  double lr = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int latent_dim = 200;
  // Hidden widths; the output layers (feature-sized scaled sigmoid for the
  // generator, single sigmoid unit for the discriminator) are appended
  // automatically.
  std::vector<int> generator_hidden = {512, 1024, 2048};
  std::vector<int> discriminator_hidden = {1024, 512, 256};
  double leaky_slope = 0.2;
  std::uint64_t seed = 0;
};

// Per-epoch training diagnostics. d_loss is the discriminator's binary
// cross-entropy, g_loss the generator's non-saturating loss; the mean
// discriminator outputs on the real and generated batches are kept so any
// other loss variant can be reconstructed offline.
struct GanEpochLoss {
  double d_loss = 0.0;
  double g_loss = 0.0;
  double mean_real_output = 0.0;
  double mean_fake_output = 0.0;
};

// Trained generator/discriminator pair over flattened spectral features.
struct GanModel {
  Mlp generator;      // latent_dim -> feature_dim, scaled sigmoid output
  Mlp discriminator;  // feature_dim -> 1, sigmoid output
  int latent_dim = 0;
  double eps = 1e-12;  // log clamp; caps the score at -log10(eps)
  std::vector<GanEpochLoss> loss_history;
  std::vector<std::string> warnings;

  Eigen::Index feature_dim() const { return generator.layers.back().out_dim(); }
};

// Alternating full-batch adversarial training: per epoch one discriminator
// update (real labels 1, generated labels 0) followed by one generator
// update with the non-saturating loss. Deterministic for a given config.
// Throws InvalidParameter for an empty/undersized training set or feature
// values outside [0, kFeatureCap]; TrainingDiverged on non-finite losses.
GanModel train_gan(const Eigen::MatrixXd& training_features, const GanTrainConfig& config);

// Draws `count` latent vectors from a standard Gaussian and maps them
// through the generator; rows are generated features in (0, kFeatureCap).
Eigen::MatrixXd generate(const GanModel& model, int count, Rng& rng);

// Discriminator output for one feature vector, in (0, 1).
double discriminator_output(const GanModel& model, const Eigen::VectorXd& feature);

// Novelty score -log10(max(discriminator output, eps)); zero for a
// confidently-familiar feature, large for a novel one.
double s_gan(const GanModel& model, const FeatureI& feature);

}  // namespace ganshm
