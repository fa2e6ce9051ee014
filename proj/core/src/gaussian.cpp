#include "ganshm/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ganshm/errors.hpp"
#include "ganshm/rng.hpp"

namespace ganshm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void factorize(JointGaussian& model) {
  Eigen::LLT<Eigen::MatrixXd> llt(model.covariance);
  if (llt.info() != Eigen::Success) {
    throw DegenerateModel("covariance is not positive definite");
  }
  model.chol_lower = llt.matrixL();
  model.log_det = 2.0 * model.chol_lower.diagonal().array().log().sum();
}

double gaussian_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * 3.141592653589793238462643 * variance);
}

}  // namespace

JointGaussian fit_joint_gaussian(const Eigen::MatrixXd& samples, double shrinkage) {
  const Eigen::Index count = samples.rows();
  const Eigen::Index dim = samples.cols();
  if (count < 2) {
    throw InvalidParameter("joint Gaussian fit needs at least 2 samples, got " +
                           std::to_string(count));
  }
  if (shrinkage <= 0.0) {
    throw InvalidParameter("shrinkage must be positive");
  }

  JointGaussian model;
  model.mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(count);

  const double mean_var = cov.trace() / static_cast<double>(dim);
  model.lambda = shrinkage * (mean_var > 0.0 ? mean_var : 1.0);
  cov.diagonal().array() += model.lambda;
  model.covariance = std::move(cov);
  factorize(model);

  double total_nl = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    total_nl += negative_log_likelihood(model, samples.row(i).transpose());
  }
  model.training_mean_nl = total_nl / static_cast<double>(count);
  return model;
}

JointGaussian make_joint_gaussian(const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& covariance,
                                  double training_mean_nl) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw InvalidParameter("covariance shape does not match mean dimension");
  }
  JointGaussian model;
  model.mean = mean;
  model.covariance = covariance;
  model.training_mean_nl = training_mean_nl;
  factorize(model);
  return model;
}

double negative_log_likelihood(const JointGaussian& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dim()) {
    throw InvalidParameter("point dimension " + std::to_string(x.size()) +
                           " does not match model dimension " + std::to_string(model.dim()));
  }
  // Quadratic form via the cached Cholesky factor: solve L y = (x - mu).
  const Eigen::VectorXd y =
      model.chol_lower.triangularView<Eigen::Lower>().solve(x - model.mean);
  const double quad = y.squaredNorm();
  return 0.5 * (quad + model.log_det + static_cast<double>(model.dim()) * kLog2Pi);
}

double s_1cg(const JointGaussian& model, const FeatureII& f2) {
  if (model.training_mean_nl == 0.0) {
    throw DegenerateModel("training mean negative log-likelihood is zero");
  }
  return negative_log_likelihood(model, f2.values) / model.training_mean_nl;
}

namespace {

struct GmmFitResult {
  Gmm2 fit;
  bool collapsed = false;
};

GmmFitResult run_em(const std::vector<double>& samples, GmmComponent a, GmmComponent b,
                    double variance_floor) {
  const std::size_t n = samples.size();
  constexpr int kMaxIterations = 500;
  constexpr double kTolerance = 1e-8;

  double prev_ll = -std::numeric_limits<double>::infinity();
  Gmm2 out;
  std::vector<double> resp_b(n);

  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    // E step.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pa = a.weight * gaussian_pdf(samples[i], a.mean, a.variance);
      const double pb = b.weight * gaussian_pdf(samples[i], b.mean, b.variance);
      const double total = pa + pb;
      if (total <= 0.0 || !std::isfinite(total)) {
        return {out, true};
      }
      resp_b[i] = pb / total;
      ll += std::log(total);
    }

    // M step.
    double nb = 0.0;
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nb += resp_b[i];
      sum_b += resp_b[i] * samples[i];
      sum_a += (1.0 - resp_b[i]) * samples[i];
    }
    const double na = static_cast<double>(n) - nb;
    if (na <= 1e-10 || nb <= 1e-10) {
      return {out, true};
    }
    a.mean = sum_a / na;
    b.mean = sum_b / nb;
    double var_a = 0.0;
    double var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double da = samples[i] - a.mean;
      const double db = samples[i] - b.mean;
      var_a += (1.0 - resp_b[i]) * da * da;
      var_b += resp_b[i] * db * db;
    }
    a.variance = std::max(var_a / na, variance_floor);
    b.variance = std::max(var_b / nb, variance_floor);
    a.weight = na / static_cast<double>(n);
    b.weight = nb / static_cast<double>(n);

    out.iterations = iter;
    out.log_likelihood = ll;
    out.ll_trace.push_back(ll);
    if (ll - prev_ll < kTolerance) {
      break;
    }
    prev_ll = ll;
  }

  if (a.mean <= b.mean) {
    out.low = a;
    out.high = b;
  } else {
    out.low = b;
    out.high = a;
  }
  return {out, false};
}

}  // namespace

Gmm2 fit_gmm2(const std::vector<double>& samples, std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n < 4) {
    throw InvalidParameter("2-component GMM fit needs at least 4 samples, got " +
                           std::to_string(n));
  }
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double range = sorted.back() - sorted.front();
  if (range == 0.0) {
    throw DegenerateFit("all samples identical; data forms a single point cluster");
  }
  const double variance_floor = 1e-12 * range * range;

  auto half_stats = [&](std::size_t begin, std::size_t end) {
    GmmComponent c;
    const double count = static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) c.mean += sorted[i];
    c.mean /= count;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = sorted[i] - c.mean;
      c.variance += d * d;
    }
    c.variance = std::max(c.variance / count, variance_floor);
    c.weight = 0.5;
    return c;
  };

  const std::size_t mid = n / 2;
  GmmFitResult result = run_em(samples, half_stats(0, mid), half_stats(mid, n), variance_floor);

  // A collapsed component is rare (median-split init is well conditioned);
  // retry from seeded random splits before giving up.
  Rng rng(derive_seed(seed, 0x67bbd1));
  for (int attempt = 0; attempt < 3 && result.collapsed; ++attempt) {
    GmmComponent a{0.5, sorted[static_cast<std::size_t>(rng.uniform(0.0, 0.5) *
                                                        static_cast<double>(n))],
                   range * range / 4.0};
    GmmComponent b{0.5, sorted[static_cast<std::size_t>((0.5 + rng.uniform(0.0, 0.5)) *
                                                        static_cast<double>(n - 1))],
                   range * range / 4.0};
    result = run_em(samples, a, b, variance_floor);
  }
  if (result.collapsed) {
    throw DegenerateFit("EM collapsed to a single component");
  }
  return result.fit;
}

double gmm2_upper_responsibility(const Gmm2& fit, double x) {
  const double pl = fit.low.weight * gaussian_pdf(x, fit.low.mean, fit.low.variance);
  const double ph = fit.high.weight * gaussian_pdf(x, fit.high.mean, fit.high.variance);
  const double total = pl + ph;
  if (total <= 0.0) {
    // Both densities underflowed; fall back to the nearer mean.
    return std::abs(x - fit.high.mean) < std::abs(x - fit.low.mean) ? 1.0 : 0.0;
  }
  return ph / total;
}

}  // namespace ganshm
