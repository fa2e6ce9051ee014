#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ganshm/gan.hpp"
#include "ganshm/gaussian.hpp"
#include "ganshm/rng.hpp"

namespace ganshm {

// Standard normal CDF via erfc; accurate to ~1e-15 relative.
double normal_cdf(double x);

// Inverse standard normal CDF: rational initial guess polished by two
// Newton steps, giving near machine precision on (0, 1).
double normal_quantile(double p);

// g(T, S) = T - S; the element fails when the load strictly exceeds the
// threshold.
double limit_state(double threshold, double load);
bool limit_state_fails(double threshold, double load);

// Reliability of the series/parallel system: element I in series with the
// parallel pair II, III. r = r1 * (r2 + r3 - r2*r3).
double system_reliability(double r1, double r2, double r3);

struct ReliabilityTargets {
  double beta_system = 0.0;
  double beta_element = 0.0;
  double p_fail_element = 0.0;
};

// Splits a system reliability index into a per-element index by assigning
// all three elements equal reliability R and solving 2R^2 - R^3 = Phi(beta)
// by bisection to 1e-14.
ReliabilityTargets element_beta_from_system(double beta_system);

ReliabilityTargets targets_from_system_reliability(double r_system);

// Iterations giving roughly one expected tail exceedance, floored at 5000.
int default_mchs_iterations(double p_fail_element);

enum class ElementId : int { kI = 0, kII = 1, kIII = 2 };
enum class ScoreSource : int { kGan = 0, kOneClassGaussian = 1 };

// One limit-state element: which score it watches, the percentile of the
// detection batch used as its load in the main system, and the percentile
// used while tuning against generated data (the analogous system).
struct LimitStateElement {
  ElementId id = ElementId::kI;
  double threshold = 0.0;
  ScoreSource source = ScoreSource::kGan;
  double main_percentile = 50.0;
  double analogous_percentile = 50.0;
};

// Three-element detection system; alarm when element I fails or elements II
// and III fail together.
struct DetectionSystem {
  std::array<LimitStateElement, 3> elements;
  ReliabilityTargets targets;
  int mchs_iterations = 0;
  std::uint64_t tune_seed = 0;
  bool tuned = false;
  // When set, elements I and III share one resistance: T3 is assigned from T1
  // after tuning.
  bool shared_t1_t3 = false;
};

// Element I watches the GAN score at P20 (P80 analogous), element II the
// Gaussian score at P50, element III the GAN score at P50; thresholds unset.
DetectionSystem make_default_system();

struct SystemDecision {
  bool alarm = false;
  std::array<bool, 3> failed = {false, false, false};
};

// Applies the system topology to per-element loads (indexed by ElementId).
SystemDecision evaluate_system(const DetectionSystem& system,
                               const std::array<double, 3>& loads);

// Load samples collected for one element across MCHS iterations, plus the
// record of what the histogram cleaner removed.
struct LoadHistogram {
  ElementId element = ElementId::kI;
  std::vector<double> samples;
  bool cleaned = false;
  struct RemovalRound {
    int round = 0;
    double mean_ratio = 0.0;
    std::size_t removed = 0;
  };
  std::vector<RemovalRound> removal_log;
};

// Empirical percentile (0..100) with linear interpolation between order
// statistics; pct 50 of an odd-length vector is its middle element.
double percentile(std::vector<double> values, double pct);

// Monte Carlo histogram sampling: per iteration, generate window_count fake
// features, score them with both models, and record one load per element at
// its analogous percentile. A degenerate generated spectrum is resampled
// (bounded retries). Returns histograms indexed by ElementId.
std::array<LoadHistogram, 3> mchs_sample_loads(const GanModel& gan,
                                               const JointGaussian& one_cg,
                                               int window_count, int iterations, Rng& rng,
                                               const DetectionSystem& system);

// Iterative two-component-GMM tail removal: fit, and while the upper/lower
// component mean ratio exceeds round+1, drop the samples assigned to the
// upper component. Unimodal histograms pass through unchanged.
LoadHistogram clean_histogram(const LoadHistogram& histogram, std::uint64_t seed);

// The (1 - p_fail) empirical quantile of the surviving samples.
double select_threshold(const LoadHistogram& histogram, double p_fail_element);

// Full tuning pass: derive element targets, sample loads, clean each
// histogram, and read off the thresholds.
DetectionSystem tune_system(const GanModel& gan, const JointGaussian& one_cg,
                            int window_count, double beta_system, int iterations,
                            Rng& rng, const DetectionSystem& prototype = make_default_system());

}  // namespace ganshm
