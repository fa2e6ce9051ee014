#include "ganshm/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ganshm/errors.hpp"

namespace ganshm {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244008443621048); }

namespace {

double normal_pdf(double x) {
  return 0.3989422804014326779399460599344 * std::exp(-0.5 * x * x);
}

// Rational approximation of the probit function (relative error ~1e-9),
// used only as the Newton starting point.
double quantile_estimate(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidParameter("normal quantile requires p in (0, 1)");
  }
  double x = quantile_estimate(p);
  for (int i = 0; i < 2; ++i) {
    const double err = normal_cdf(x) - p;
    x -= err / normal_pdf(x);
  }
  return x;
}

double limit_state(double threshold, double load) { return threshold - load; }

bool limit_state_fails(double threshold, double load) { return load > threshold; }

double system_reliability(double r1, double r2, double r3) {
  for (double r : {r1, r2, r3}) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw InvalidParameter("element reliabilities must lie in [0, 1]");
    }
  }
  return r1 * (r2 + r3 - r2 * r3);
}

ReliabilityTargets targets_from_system_reliability(double r_system) {
  if (!(r_system > 0.0 && r_system <= 1.0)) {
    throw InvalidParameter("system reliability must lie in (0, 1]");
  }
  // 2R^2 - R^3 is strictly increasing on (0, 1], from 0 to 1, so a unique
  // root exists for any attainable system reliability.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    const double value = 2.0 * mid * mid - mid * mid * mid;
    if (value < r_system) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_element = 0.5 * (lo + hi);

  ReliabilityTargets targets;
  targets.beta_element = normal_quantile(r_element);
  targets.p_fail_element = 1.0 - r_element;
  targets.beta_system = normal_quantile(r_system);
  return targets;
}

ReliabilityTargets element_beta_from_system(double beta_system) {
  if (!(beta_system > 0.0)) {
    throw InvalidParameter("system reliability index must be positive");
  }
  ReliabilityTargets targets = targets_from_system_reliability(normal_cdf(beta_system));
  targets.beta_system = beta_system;
  return targets;
}

int default_mchs_iterations(double p_fail_element) {
  if (!(p_fail_element > 0.0 && p_fail_element < 1.0)) {
    throw InvalidParameter("element failure probability must lie in (0, 1)");
  }
  const double needed = std::ceil(1.0 / p_fail_element);
  return std::max(5000, static_cast<int>(needed));
}

DetectionSystem make_default_system() {
  DetectionSystem system;
  system.elements[0] = {ElementId::kI, 0.0, ScoreSource::kGan, 20.0, 80.0};
  system.elements[1] = {ElementId::kII, 0.0, ScoreSource::kOneClassGaussian, 50.0, 50.0};
  system.elements[2] = {ElementId::kIII, 0.0, ScoreSource::kGan, 50.0, 50.0};
  return system;
}

SystemDecision evaluate_system(const DetectionSystem& system,
                               const std::array<double, 3>& loads) {
  SystemDecision decision;
  for (int e = 0; e < 3; ++e) {
    decision.failed[static_cast<std::size_t>(e)] =
        limit_state_fails(system.elements[static_cast<std::size_t>(e)].threshold,
                          loads[static_cast<std::size_t>(e)]);
  }
  decision.alarm = decision.failed[0] || (decision.failed[1] && decision.failed[2]);
  return decision;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) {
    throw InvalidParameter("percentile of an empty set");
  }
  if (!(pct >= 0.0 && pct <= 100.0)) {
    throw InvalidParameter("percentile must lie in [0, 100]");
  }
  std::sort(values.begin(), values.end());
  const double h = (pct / 100.0) * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(h);
  if (lower + 1 >= values.size()) {
    return values.back();
  }
  const double frac = h - static_cast<double>(lower);
  return values[lower] + frac * (values[lower + 1] - values[lower]);
}

std::array<LoadHistogram, 3> mchs_sample_loads(const GanModel& gan,
                                               const JointGaussian& one_cg,
                                               int window_count, int iterations, Rng& rng,
                                               const DetectionSystem& system) {
  if (window_count < 2) {
    throw InvalidParameter("MCHS window count must be >= 2");
  }
  if (iterations < 100) {
    throw InvalidParameter("MCHS needs at least 100 iterations");
  }
  if (one_cg.dim() % 3 != 0) {
    throw InvalidParameter("one-class Gaussian dimension must be 3 x channels");
  }
  const std::size_t channels = static_cast<std::size_t>(one_cg.dim() / 3);
  const std::size_t feature_dim = static_cast<std::size_t>(gan.feature_dim());
  if (feature_dim % channels != 0 || (feature_dim / channels) % 1 != 0) {
    throw InvalidParameter("GAN feature dim is not divisible into channels");
  }
  const std::size_t d_l = 2 * (feature_dim / channels);

  std::array<LoadHistogram, 3> histograms;
  for (int e = 0; e < 3; ++e) {
    histograms[static_cast<std::size_t>(e)].element = static_cast<ElementId>(e);
    histograms[static_cast<std::size_t>(e)].samples.reserve(static_cast<std::size_t>(iterations));
  }

  constexpr int kMaxResample = 100;
  std::vector<double> gan_scores(static_cast<std::size_t>(window_count));
  std::vector<double> cg_scores(static_cast<std::size_t>(window_count));

  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd batch = generate(gan, window_count, rng);
    for (int w = 0; w < window_count; ++w) {
      FeatureI f1{batch.row(w).transpose()};
      int retries = 0;
      for (;;) {
        try {
          const FeatureII f2 = feature_ii_from_feature_i(f1, channels, d_l);
          gan_scores[static_cast<std::size_t>(w)] = s_gan(gan, f1);
          cg_scores[static_cast<std::size_t>(w)] = s_1cg(one_cg, f2);
          break;
        } catch (const DegenerateSpectrum&) {
          if (++retries > kMaxResample) {
            throw DegenerateSpectrum(
                "generator persistently produced zero-energy channels");
          }
          f1.values = generate(gan, 1, rng).row(0).transpose();
        }
      }
    }
    for (const auto& element : system.elements) {
      const auto& scores =
          element.source == ScoreSource::kGan ? gan_scores : cg_scores;
      histograms[static_cast<std::size_t>(element.id)].samples.push_back(
          percentile(scores, element.analogous_percentile));
    }
  }
  return histograms;
}

LoadHistogram clean_histogram(const LoadHistogram& histogram, std::uint64_t seed) {
  LoadHistogram out = histogram;
  out.cleaned = true;

  int round = 1;
  while (out.samples.size() >= 4) {
    Gmm2 fit;
    try {
      fit = fit_gmm2(out.samples, derive_seed(seed, static_cast<std::uint64_t>(round)));
    } catch (const DegenerateFit&) {
      break;  // one cluster; nothing to remove
    }
    const double ratio = fit.high.mean / fit.low.mean;
    if (!(ratio > static_cast<double>(round + 1))) {
      break;
    }
    std::vector<double> survivors;
    survivors.reserve(out.samples.size());
    for (double x : out.samples) {
      if (gmm2_upper_responsibility(fit, x) <= 0.5) {
        survivors.push_back(x);
      }
    }
    const std::size_t removed = out.samples.size() - survivors.size();
    if (removed == 0 || survivors.empty()) {
      break;  // equilibrium: assignment removes nothing (or everything)
    }
    out.removal_log.push_back({round, ratio, removed});
    out.samples = std::move(survivors);
    ++round;
  }
  return out;
}

double select_threshold(const LoadHistogram& histogram, double p_fail_element) {
  if (histogram.samples.empty()) {
    throw InvalidState("cannot select a threshold from an empty histogram");
  }
  if (!(p_fail_element > 0.0 && p_fail_element < 1.0)) {
    throw InvalidParameter("element failure probability must lie in (0, 1)");
  }
  return percentile(histogram.samples, 100.0 * (1.0 - p_fail_element));
}

DetectionSystem tune_system(const GanModel& gan, const JointGaussian& one_cg,
                            int window_count, double beta_system, int iterations,
                            Rng& rng, const DetectionSystem& prototype) {
  DetectionSystem system = prototype;
  system.targets = element_beta_from_system(beta_system);
  system.mchs_iterations =
      iterations > 0 ? iterations : default_mchs_iterations(system.targets.p_fail_element);
  system.tune_seed = rng.seed();

  const auto histograms =
      mchs_sample_loads(gan, one_cg, window_count, system.mchs_iterations, rng, system);
  for (int e = 0; e < 3; ++e) {
    const LoadHistogram cleaned = clean_histogram(
        histograms[static_cast<std::size_t>(e)], derive_seed(rng.seed(), 0xc1ea0 + static_cast<std::uint64_t>(e)));
    system.elements[static_cast<std::size_t>(e)].threshold =
        select_threshold(cleaned, system.targets.p_fail_element);
  }
  if (system.shared_t1_t3) {
    system.elements[2].threshold = system.elements[0].threshold;
  }
  system.tuned = true;
  return system;
}

}  // namespace ganshm
