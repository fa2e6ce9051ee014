#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace ganshm {

// Multichannel acceleration record: one row per channel, one column per
// sample, all channels sampled synchronously at sample_rate_hz.
struct RawStream {
  double sample_rate_hz = 0.0;
  Eigen::MatrixXd samples;  // N x M

  std::size_t channels() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(samples.cols()); }
};

// One detection unit: N channels x d_l consecutive samples.
struct TimeSeriesWindow {
  Eigen::MatrixXd data;  // N x d_l
  std::size_t window_index = 0;

  std::size_t channels() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(data.cols()); }
};

// Upper cap applied to the high-dimensional spectral feature.
inline constexpr double kFeatureCap = 10.0;

// High-dimensional feature: per channel the first d_l/2 FFT magnitudes,
// concatenated channel-major, each entry clipped into [0, kFeatureCap].
struct FeatureI {
  Eigen::VectorXd values;  // length N * d_l / 2
};

// Low-dimensional feature: per channel the normalized frequencies (fraction
// of the half spectrum, in [0, 1]) at which cumulative spectral energy
// crosses 25%, 50% and 75%; concatenated channel-major, 3 per channel.
struct FeatureII {
  Eigen::VectorXd values;  // length 3 * N
};

// Cuts the stream into floor(M / d_l) contiguous non-overlapping windows in
// acquisition order; a trailing remainder shorter than d_l is discarded.
// Throws InvalidParameter if d_l is zero or odd, InsufficientData if the
// stream is shorter than one window.
std::vector<TimeSeriesWindow> make_windows(const RawStream& stream, std::size_t d_l);

// Per channel, magnitudes of the first d_l/2 DFT bins (bins 0 .. d_l/2 - 1).
// Throws InvalidData on non-finite samples.
Eigen::MatrixXd fft_half_magnitudes(const TimeSeriesWindow& window);  // N x d_l/2

FeatureI extract_feature_i(const TimeSeriesWindow& window);

// Normalized power spectral density: magnitudes squared and scaled to sum
// to one. Throws DegenerateSpectrum when every magnitude is zero.
Eigen::VectorXd periodogram(const Eigen::VectorXd& channel_magnitudes);

FeatureII extract_feature_ii(const TimeSeriesWindow& window);

// Rebuilds FeatureII from an existing (possibly clipped) FeatureI vector.
// Used for generated features, where no time-domain signal exists.
FeatureII feature_ii_from_feature_i(const FeatureI& f1, std::size_t channels,
                                    std::size_t d_l);

// The three energy-quartile crossings of a PSD, as fractions of its length.
// Cumulative energy is treated as uniform within each bin, so a flat PSD
// yields exactly (0.25, 0.50, 0.75).
Eigen::Vector3d energy_quartiles(const Eigen::VectorXd& psd);

}  // namespace ganshm
