#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ganshm/gan.hpp"
#include "ganshm/gaussian.hpp"
#include "ganshm/reliability.hpp"
#include "ganshm/signal.hpp"

namespace ganshm {

enum class BaselineMode : int { kStatic = 0, kDynamic = 1 };

struct EngineConfig {
  std::size_t d_l = 1000;  // samples per window
  std::size_t t_l = 100;   // training windows per baseline
  std::size_t v_l = 10;    // windows per detection iteration
  double beta = 3.0;       // target system reliability index
  BaselineMode mode = BaselineMode::kDynamic;
  GanTrainConfig gan;
  double gaussian_shrinkage = 1e-6;
  int mchs_iterations = 5000;  // 0 -> default_mchs_iterations
  std::uint64_t seed = 0;
  DetectionSystem system_prototype = make_default_system();
};

// One learned data class: the models trained on its windows and the
// thresholds tuned for it.
struct BaselineModel {
  int class_ordinal = 0;
  GanModel gan;
  JointGaussian one_cg;
  DetectionSystem system;
  std::size_t train_window_begin = 0;
  std::size_t train_window_end = 0;  // exclusive
};

struct AlarmEvent {
  std::size_t iteration = 0;     // global detection-iteration index
  std::size_t window_begin = 0;  // first window of the triggering batch
  std::size_t window_end = 0;    // exclusive
  std::array<bool, 3> failed_elements = {false, false, false};
  std::array<double, 3> loads = {0.0, 0.0, 0.0};
};

enum class ClassOutcome : int { kDetectedOnTime = 0, kDetectedWithDelay = 1, kUndetected = 2 };

// Per-iteration score trace; enough to re-plot loads against thresholds and
// to re-derive every alarm decision.
struct IterationTrace {
  std::size_t iteration = 0;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  int baseline_ordinal = 0;
  std::array<double, 3> loads = {0.0, 0.0, 0.0};
  std::array<double, 3> thresholds = {0.0, 0.0, 0.0};
  bool alarm = false;
};

struct ClassEvaluation {
  ClassOutcome outcome = ClassOutcome::kUndetected;
  std::size_t boundary_window = 0;
  long delay_iterations = -1;  // 0 when on time, -1 when undetected
};

struct DetectionReport {
  std::vector<AlarmEvent> alarms;
  std::vector<IterationTrace> traces;
  std::size_t total_iterations = 0;
  int baselines_trained = 0;
  bool final_baseline_incomplete = false;

  // Filled by evaluate().
  bool evaluated = false;
  std::vector<bool> alarm_is_false;
  std::vector<ClassEvaluation> classes;
  std::size_t false_alarm_count = 0;
  double false_alarm_ratio = 0.0;
};

// Window indices at which each new data class starts; used only for
// evaluation, never by the detection path.
struct GroundTruth {
  std::vector<std::size_t> boundaries;
};

// Extracts both feature sets from the training windows and fits the GAN and
// the joint Gaussian. The detection system is left untuned.
BaselineModel train_baseline(const std::vector<TimeSeriesWindow>& training_windows,
                             const EngineConfig& config, int class_ordinal = 0);

// Tunes the baseline's detection system to the configured reliability index.
void tune_baseline(BaselineModel& baseline, const EngineConfig& config);

// Scores one batch of v_l windows against the baseline and applies the
// system; returns the alarm (with loads and failed elements) if it fires.
std::optional<AlarmEvent> detect_iteration(const BaselineModel& baseline,
                                           const std::vector<TimeSeriesWindow>& batch);

// Train + tune once on the first t_l windows, then monitor the rest in
// consecutive v_l batches. The baseline is never revisited.
DetectionReport run_static(const std::vector<TimeSeriesWindow>& windows,
                           const EngineConfig& config);

// Like run_static, but after every alarm the next t_l windows become the
// training set of a new baseline (the windows of the triggering batch are
// not reused), thresholds are retuned, and monitoring resumes.
DetectionReport run_dynamic(const std::vector<TimeSeriesWindow>& windows,
                            const EngineConfig& config);

DetectionReport run_engine(const std::vector<TimeSeriesWindow>& windows,
                           const EngineConfig& config);

// Labels each alarm true/false against the ground-truth boundaries (an alarm
// earlier than one detection window before the next undetected boundary is
// false) and scores each class as on-time, delayed or undetected.
void evaluate(DetectionReport& report, const GroundTruth& truth, std::size_t v_l);

}  // namespace ganshm
