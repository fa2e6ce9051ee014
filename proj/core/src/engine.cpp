#include "ganshm/engine.hpp"

#include <algorithm>
#include <string>

#include "ganshm/errors.hpp"

namespace ganshm {

namespace {

// Seed streams per baseline ordinal.
constexpr std::uint64_t kGanStream = 0x100000;
constexpr std::uint64_t kTuneStream = 0x200000;

Eigen::MatrixXd collect_feature_i(const std::vector<TimeSeriesWindow>& windows) {
  const Eigen::Index count = static_cast<Eigen::Index>(windows.size());
  Eigen::MatrixXd features;
  for (Eigen::Index i = 0; i < count; ++i) {
    const FeatureI f = extract_feature_i(windows[static_cast<std::size_t>(i)]);
    if (i == 0) features.resize(count, f.values.size());
    features.row(i) = f.values.transpose();
  }
  return features;
}

Eigen::MatrixXd collect_feature_ii(const std::vector<TimeSeriesWindow>& windows) {
  const Eigen::Index count = static_cast<Eigen::Index>(windows.size());
  Eigen::MatrixXd features;
  for (Eigen::Index i = 0; i < count; ++i) {
    const FeatureII f = extract_feature_ii(windows[static_cast<std::size_t>(i)]);
    if (i == 0) features.resize(count, f.values.size());
    features.row(i) = f.values.transpose();
  }
  return features;
}

std::array<double, 3> batch_loads(const BaselineModel& baseline,
                                  const std::vector<TimeSeriesWindow>& batch) {
  std::vector<double> gan_scores;
  std::vector<double> cg_scores;
  gan_scores.reserve(batch.size());
  cg_scores.reserve(batch.size());
  for (const auto& window : batch) {
    gan_scores.push_back(s_gan(baseline.gan, extract_feature_i(window)));
    cg_scores.push_back(s_1cg(baseline.one_cg, extract_feature_ii(window)));
  }
  std::array<double, 3> loads{};
  for (const auto& element : baseline.system.elements) {
    const auto& scores = element.source == ScoreSource::kGan ? gan_scores : cg_scores;
    loads[static_cast<std::size_t>(element.id)] = percentile(scores, element.main_percentile);
  }
  return loads;
}

// Shared monitoring loop; in dynamic mode each alarm triggers retraining on
// the following t_l windows.
DetectionReport run(const std::vector<TimeSeriesWindow>& windows, const EngineConfig& config) {
  if (config.t_l < 2 || config.v_l < 2) {
    throw InvalidParameter("t_l and v_l must be >= 2");
  }
  if (windows.size() < config.t_l + config.v_l) {
    throw InsufficientData("stream provides " + std::to_string(windows.size()) +
                           " windows; need at least t_l + v_l = " +
                           std::to_string(config.t_l + config.v_l));
  }

  DetectionReport report;
  std::size_t cursor = 0;

  auto train_and_tune = [&](int ordinal) {
    const std::vector<TimeSeriesWindow> training(
        windows.begin() + static_cast<std::ptrdiff_t>(cursor),
        windows.begin() + static_cast<std::ptrdiff_t>(cursor + config.t_l));
    BaselineModel baseline = train_baseline(training, config, ordinal);
    baseline.train_window_begin = cursor;
    baseline.train_window_end = cursor + config.t_l;
    tune_baseline(baseline, config);
    cursor += config.t_l;
    ++report.baselines_trained;
    return baseline;
  };

  BaselineModel baseline = train_and_tune(0);

  std::size_t iteration = 0;
  while (cursor + config.v_l <= windows.size()) {
    const std::vector<TimeSeriesWindow> batch(
        windows.begin() + static_cast<std::ptrdiff_t>(cursor),
        windows.begin() + static_cast<std::ptrdiff_t>(cursor + config.v_l));
    const std::array<double, 3> loads = batch_loads(baseline, batch);
    const SystemDecision decision = evaluate_system(baseline.system, loads);

    IterationTrace trace;
    trace.iteration = iteration;
    trace.window_begin = batch.front().window_index;
    trace.window_end = batch.back().window_index + 1;
    trace.baseline_ordinal = baseline.class_ordinal;
    trace.loads = loads;
    for (int e = 0; e < 3; ++e) {
      trace.thresholds[static_cast<std::size_t>(e)] =
          baseline.system.elements[static_cast<std::size_t>(e)].threshold;
    }
    trace.alarm = decision.alarm;
    report.traces.push_back(trace);

    if (decision.alarm) {
      AlarmEvent alarm;
      alarm.iteration = iteration;
      alarm.window_begin = cursor;
      alarm.window_end = cursor + config.v_l;
      alarm.failed_elements = decision.failed;
      alarm.loads = loads;
      report.alarms.push_back(alarm);
    }

    cursor += config.v_l;
    ++iteration;

    if (decision.alarm && config.mode == BaselineMode::kDynamic) {
      if (cursor + config.t_l > windows.size()) {
        report.final_baseline_incomplete = true;
        break;
      }
      baseline = train_and_tune(baseline.class_ordinal + 1);
    }
  }

  report.total_iterations = iteration;
  return report;
}

}  // namespace

BaselineModel train_baseline(const std::vector<TimeSeriesWindow>& training_windows,
                             const EngineConfig& config, int class_ordinal) {
  if (training_windows.size() != config.t_l) {
    throw InvalidParameter("expected exactly t_l = " + std::to_string(config.t_l) +
                           " training windows, got " + std::to_string(training_windows.size()));
  }
  BaselineModel baseline;
  baseline.class_ordinal = class_ordinal;
  baseline.train_window_begin = training_windows.front().window_index;
  baseline.train_window_end = training_windows.back().window_index + 1;

  const Eigen::MatrixXd f1_set = collect_feature_i(training_windows);
  const Eigen::MatrixXd f2_set = collect_feature_ii(training_windows);

  GanTrainConfig gan_config = config.gan;
  gan_config.seed = derive_seed(config.seed, kGanStream + static_cast<std::uint64_t>(class_ordinal));
  baseline.gan = train_gan(f1_set, gan_config);
  baseline.one_cg = fit_joint_gaussian(f2_set, config.gaussian_shrinkage);
  baseline.system = config.system_prototype;
  return baseline;
}

void tune_baseline(BaselineModel& baseline, const EngineConfig& config) {
  Rng rng(derive_seed(config.seed,
                      kTuneStream + static_cast<std::uint64_t>(baseline.class_ordinal)));
  baseline.system =
      tune_system(baseline.gan, baseline.one_cg, static_cast<int>(config.v_l), config.beta,
                  config.mchs_iterations, rng, config.system_prototype);
}

std::optional<AlarmEvent> detect_iteration(const BaselineModel& baseline,
                                           const std::vector<TimeSeriesWindow>& batch) {
  if (batch.empty()) {
    throw InvalidParameter("detection batch is empty");
  }
  if (!baseline.system.tuned) {
    throw InvalidState("detection system has not been tuned");
  }
  const std::array<double, 3> loads = batch_loads(baseline, batch);
  const SystemDecision decision = evaluate_system(baseline.system, loads);
  if (!decision.alarm) {
    return std::nullopt;
  }
  AlarmEvent alarm;
  alarm.window_begin = batch.front().window_index;
  alarm.window_end = batch.back().window_index + 1;
  alarm.failed_elements = decision.failed;
  alarm.loads = loads;
  return alarm;
}

DetectionReport run_static(const std::vector<TimeSeriesWindow>& windows,
                           const EngineConfig& config) {
  EngineConfig static_config = config;
  static_config.mode = BaselineMode::kStatic;
  return run(windows, static_config);
}

DetectionReport run_dynamic(const std::vector<TimeSeriesWindow>& windows,
                            const EngineConfig& config) {
  EngineConfig dynamic_config = config;
  dynamic_config.mode = BaselineMode::kDynamic;
  return run(windows, dynamic_config);
}

DetectionReport run_engine(const std::vector<TimeSeriesWindow>& windows,
                           const EngineConfig& config) {
  return run(windows, config);
}

void evaluate(DetectionReport& report, const GroundTruth& truth, std::size_t v_l) {
  report.alarm_is_false.assign(report.alarms.size(), false);
  report.classes.clear();
  report.classes.reserve(truth.boundaries.size());
  for (std::size_t boundary : truth.boundaries) {
    ClassEvaluation eval;
    eval.boundary_window = boundary;
    report.classes.push_back(eval);
  }

  // First recorded iteration whose batch overlaps each class's span; delay
  // is measured from there.
  auto first_overlap_iteration = [&](std::size_t boundary) -> long {
    for (const auto& trace : report.traces) {
      if (trace.window_end > boundary) {
        return static_cast<long>(trace.iteration);
      }
    }
    return -1;
  };

  std::size_t next_class = 0;
  report.false_alarm_count = 0;
  for (std::size_t a = 0; a < report.alarms.size(); ++a) {
    const AlarmEvent& alarm = report.alarms[a];
    if (next_class >= truth.boundaries.size()) {
      report.alarm_is_false[a] = true;
      ++report.false_alarm_count;
      continue;
    }
    const std::size_t boundary = truth.boundaries[next_class];
    if (alarm.window_begin + v_l < boundary) {
      // Fired strictly earlier than one detection window before the class
      // starts: a false alarm. Class bookkeeping is unaffected.
      report.alarm_is_false[a] = true;
      ++report.false_alarm_count;
      continue;
    }
    // True detection. If the alarm landed beyond later boundaries, the
    // intermediate classes were never detected.
    std::size_t detected = next_class;
    while (detected + 1 < truth.boundaries.size() &&
           truth.boundaries[detected + 1] <= alarm.window_begin) {
      ++detected;
    }
    ClassEvaluation& eval = report.classes[detected];
    const long first_overlap = first_overlap_iteration(truth.boundaries[detected]);
    const long delay =
        first_overlap < 0 ? 0 : std::max<long>(0, static_cast<long>(alarm.iteration) - first_overlap);
    eval.outcome = delay == 0 ? ClassOutcome::kDetectedOnTime : ClassOutcome::kDetectedWithDelay;
    eval.delay_iterations = delay;
    next_class = detected + 1;
  }

  report.false_alarm_ratio =
      report.total_iterations == 0
          ? 0.0
          : static_cast<double>(report.false_alarm_count) / static_cast<double>(report.total_iterations);
  report.evaluated = true;
}

}  // namespace ganshm
