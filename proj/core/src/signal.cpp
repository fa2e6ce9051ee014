#include "ganshm/signal.hpp"

#include <cmath>
#include <string>

#include "ganshm/errors.hpp"
#include "ganshm/fft.hpp"

namespace ganshm {

namespace {

void validate_window(const TimeSeriesWindow& window) {
  if (window.length() < 4 || window.length() % 2 != 0) {
    throw InvalidParameter("window length must be even and >= 4, got " +
                           std::to_string(window.length()));
  }
  if (window.channels() == 0) {
    throw InvalidParameter("window has no channels");
  }
}

}  // namespace

std::vector<TimeSeriesWindow> make_windows(const RawStream& stream, std::size_t d_l) {
  if (d_l == 0 || d_l % 2 != 0) {
    throw InvalidParameter("window length d_l must be even and nonzero, got " +
                           std::to_string(d_l));
  }
  if (stream.channels() == 0) {
    throw InvalidParameter("stream has no channels");
  }
  const std::size_t m = stream.length();
  if (m < d_l) {
    throw InsufficientData("stream length " + std::to_string(m) +
                           " is shorter than one window of " + std::to_string(d_l));
  }
  const std::size_t count = m / d_l;
  std::vector<TimeSeriesWindow> windows;
  windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    TimeSeriesWindow win;
    win.data = stream.samples.middleCols(static_cast<Eigen::Index>(w * d_l),
                                         static_cast<Eigen::Index>(d_l));
    win.window_index = w;
    windows.push_back(std::move(win));
  }
  return windows;
}

Eigen::MatrixXd fft_half_magnitudes(const TimeSeriesWindow& window) {
  validate_window(window);
  const std::size_t n = window.channels();
  const std::size_t d_l = window.length();
  const std::size_t half = d_l / 2;

  Eigen::MatrixXd magnitudes(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(half));
  std::vector<double> channel(d_l);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t t = 0; t < d_l; ++t) {
      const double x = window.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t));
      if (!std::isfinite(x)) {
        throw InvalidData("non-finite sample in window " + std::to_string(window.window_index) +
                          ", channel " + std::to_string(c));
      }
      channel[t] = x;
    }
    const auto spectrum = fft_real(channel);
    for (std::size_t k = 0; k < half; ++k) {
      magnitudes(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = std::abs(spectrum[k]);
    }
  }
  return magnitudes;
}

FeatureI extract_feature_i(const TimeSeriesWindow& window) {
  const Eigen::MatrixXd magnitudes = fft_half_magnitudes(window);
  const Eigen::Index n = magnitudes.rows();
  const Eigen::Index half = magnitudes.cols();

  FeatureI feature;
  feature.values.resize(n * half);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index k = 0; k < half; ++k) {
      feature.values[c * half + k] = std::min(magnitudes(c, k), kFeatureCap);
    }
  }
  return feature;
}

Eigen::VectorXd periodogram(const Eigen::VectorXd& channel_magnitudes) {
  const Eigen::VectorXd power = channel_magnitudes.array().square();
  const double total = power.sum();
  if (!(total > 0.0)) {
    throw DegenerateSpectrum("channel spectrum has zero energy");
  }
  return power / total;
}

Eigen::Vector3d energy_quartiles(const Eigen::VectorXd& psd) {
  const Eigen::Index bins = psd.size();
  Eigen::Vector3d out;
  const double targets[3] = {0.25, 0.50, 0.75};
  double cumulative = 0.0;
  Eigen::Index bin = 0;
  for (int q = 0; q < 3; ++q) {
    const double target = targets[q];
    while (bin < bins && cumulative + psd[bin] < target) {
      cumulative += psd[bin];
      ++bin;
    }
    double crossing;
    if (bin >= bins) {
      crossing = static_cast<double>(bins);  // rounding pushed us past the end
    } else {
      const double fraction = (target - cumulative) / psd[bin];
      crossing = static_cast<double>(bin) + std::min(fraction, 1.0);
    }
    out[q] = crossing / static_cast<double>(bins);
  }
  return out;
}

FeatureII extract_feature_ii(const TimeSeriesWindow& window) {
  // Quartiles come from the unclipped magnitudes; clipping only applies to
  // the high-dimensional feature path.
  const Eigen::MatrixXd magnitudes = fft_half_magnitudes(window);
  const Eigen::Index n = magnitudes.rows();

  FeatureII feature;
  feature.values.resize(3 * n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::VectorXd psd = periodogram(magnitudes.row(c).transpose());
    feature.values.segment<3>(3 * c) = energy_quartiles(psd);
  }
  return feature;
}

FeatureII feature_ii_from_feature_i(const FeatureI& f1, std::size_t channels,
                                    std::size_t d_l) {
  if (channels == 0 || d_l == 0 || d_l % 2 != 0) {
    throw InvalidParameter("channels must be >= 1 and d_l even and nonzero");
  }
  const std::size_t half = d_l / 2;
  if (static_cast<std::size_t>(f1.values.size()) != channels * half) {
    throw InvalidParameter("feature length " + std::to_string(f1.values.size()) +
                           " does not match " + std::to_string(channels) + " channels x " +
                           std::to_string(half) + " bins");
  }

  FeatureII feature;
  feature.values.resize(3 * static_cast<Eigen::Index>(channels));
  for (std::size_t c = 0; c < channels; ++c) {
    const Eigen::VectorXd magnitudes =
        f1.values.segment(static_cast<Eigen::Index>(c * half), static_cast<Eigen::Index>(half));
    const Eigen::VectorXd psd = periodogram(magnitudes);
    feature.values.segment<3>(3 * static_cast<Eigen::Index>(c)) = energy_quartiles(psd);
  }
  return feature;
}

}  // namespace ganshm
