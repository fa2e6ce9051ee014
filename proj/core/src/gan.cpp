#include "ganshm/gan.hpp"

#include <cmath>
#include <string>

#include "ganshm/errors.hpp"

namespace ganshm {

namespace {

// Seed streams within one training run.
constexpr std::uint64_t kGeneratorInitStream = 1;
constexpr std::uint64_t kDiscriminatorInitStream = 2;
constexpr std::uint64_t kLatentStream = 3;

Eigen::MatrixXd sample_latent(int count, int latent_dim, Rng& rng) {
  Eigen::MatrixXd z(count, latent_dim);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      z(r, c) = rng.gaussian();
    }
  }
  return z;
}

std::vector<LayerSpec> hidden_specs(const std::vector<int>& widths, double slope) {
  std::vector<LayerSpec> specs;
  specs.reserve(widths.size() + 1);
  for (int width : widths) {
    specs.push_back({width, Activation::kLeakyRelu, slope});
  }
  return specs;
}

}  // namespace

GanModel train_gan(const Eigen::MatrixXd& training_features, const GanTrainConfig& config) {
  const Eigen::Index batch = training_features.rows();
  const Eigen::Index feature_dim = training_features.cols();
  if (batch < 2) {
    throw InvalidParameter("GAN training needs at least 2 feature vectors, got " +
                           std::to_string(batch));
  }
  if (config.epochs < 1 || config.latent_dim < 1) {
    throw InvalidParameter("epochs and latent_dim must be >= 1");
  }
  if (!training_features.allFinite() || training_features.minCoeff() < 0.0 ||
      training_features.maxCoeff() > kFeatureCap) {
    throw InvalidParameter("training features must be finite and within [0, 10]");
  }

  GanModel model;
  model.latent_dim = config.latent_dim;

  auto gen_specs = hidden_specs(config.generator_hidden, config.leaky_slope);
  gen_specs.push_back({static_cast<int>(feature_dim), Activation::kScaledSigmoid, kFeatureCap});
  model.generator =
      init_mlp(config.latent_dim, gen_specs, derive_seed(config.seed, kGeneratorInitStream));

  auto disc_specs = hidden_specs(config.discriminator_hidden, config.leaky_slope);
  disc_specs.push_back({1, Activation::kSigmoid, 0.0});
  model.discriminator = init_mlp(static_cast<int>(feature_dim), disc_specs,
                                 derive_seed(config.seed, kDiscriminatorInitStream));

  if (!config.generator_hidden.empty() &&
      feature_dim <= config.generator_hidden.back()) {
    model.warnings.push_back(
        "feature dim " + std::to_string(feature_dim) +
        " does not exceed the generator's penultimate width " +
        std::to_string(config.generator_hidden.back()) +
        "; consider narrowing the generator");
  }

  const AdamConfig adam{config.lr, config.beta1, config.beta2, 1e-8};
  AdamState gen_state = make_adam_state(model.generator, adam);
  AdamState disc_state = make_adam_state(model.discriminator, adam);

  Rng latent_rng(derive_seed(config.seed, kLatentStream));
  const double eps = model.eps;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  model.loss_history.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Discriminator step: real batch scored against label 1, a fresh
    // generated batch against label 0.
    const Eigen::MatrixXd fake = forward(model.generator, sample_latent(static_cast<int>(batch),
                                                                        config.latent_dim,
                                                                        latent_rng));
    ForwardCache real_cache;
    ForwardCache fake_cache;
    const Eigen::MatrixXd real_out = forward(model.discriminator, training_features, &real_cache);
    const Eigen::MatrixXd fake_out = forward(model.discriminator, fake, &fake_cache);

    const double d_loss =
        -((real_out.array() + eps).log().mean() + (1.0 - fake_out.array() + eps).log().mean());

    const Eigen::MatrixXd d_real_grad =
        (-inv_batch / (real_out.array() + eps)).matrix();
    const Eigen::MatrixXd d_fake_grad =
        (inv_batch / (1.0 - fake_out.array() + eps)).matrix();

    Gradients d_grads = backward(model.discriminator, real_cache, d_real_grad);
    const Gradients d_grads_fake = backward(model.discriminator, fake_cache, d_fake_grad);
    for (std::size_t i = 0; i < d_grads.layers.size(); ++i) {
      d_grads.layers[i].weights += d_grads_fake.layers[i].weights;
      d_grads.layers[i].biases += d_grads_fake.layers[i].biases;
    }
    adam_step(model.discriminator, d_grads, disc_state);

    // Generator step on a fresh latent batch, non-saturating loss.
    ForwardCache gen_cache;
    const Eigen::MatrixXd gen_out =
        forward(model.generator,
                sample_latent(static_cast<int>(batch), config.latent_dim, latent_rng), &gen_cache);
    ForwardCache disc_cache;
    const Eigen::MatrixXd gen_disc_out = forward(model.discriminator, gen_out, &disc_cache);

    const double g_loss = -(gen_disc_out.array() + eps).log().mean();

    const Eigen::MatrixXd g_out_grad =
        (-inv_batch / (gen_disc_out.array() + eps)).matrix();
    Eigen::MatrixXd g_input_grad;
    backward(model.discriminator, disc_cache, g_out_grad, &g_input_grad);
    const Gradients g_grads = backward(model.generator, gen_cache, g_input_grad);
    adam_step(model.generator, g_grads, gen_state);

    if (!std::isfinite(d_loss) || !std::isfinite(g_loss)) {
      throw TrainingDiverged("non-finite GAN loss at epoch " + std::to_string(epoch));
    }
    model.loss_history.push_back(
        {d_loss, g_loss, real_out.mean(), fake_out.mean()});
  }

  if (!parameters_finite(model.generator) || !parameters_finite(model.discriminator)) {
    throw TrainingDiverged("non-finite parameters after GAN training");
  }
  return model;
}

Eigen::MatrixXd generate(const GanModel& model, int count, Rng& rng) {
  if (count < 1) {
    throw InvalidParameter("generate count must be >= 1");
  }
  return forward(model.generator, sample_latent(count, model.latent_dim, rng));
}

double discriminator_output(const GanModel& model, const Eigen::VectorXd& feature) {
  if (feature.size() != model.feature_dim()) {
    throw InvalidParameter("feature length " + std::to_string(feature.size()) +
                           " does not match discriminator input " +
                           std::to_string(model.feature_dim()));
  }
  const Eigen::MatrixXd out = forward(model.discriminator, feature.transpose());
  return out(0, 0);
}

double s_gan(const GanModel& model, const FeatureI& feature) {
  const double o = discriminator_output(model, feature.values);
  return -std::log10(std::max(o, model.eps));
}

}  // namespace ganshm
