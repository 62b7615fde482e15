#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "strnn/numerics.hpp"
#include "strnn/spatial_graph.hpp"
#include "strnn/volume.hpp"

namespace strnn {

inline constexpr std::size_t kFrameLength = 256;
inline constexpr std::size_t kSpectrumBins = kFrameLength / 2 + 1;
inline constexpr double kBandPowerFloor = 1e-12;

struct BandSpec {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

/// delta 1-3, theta 4-7, alpha 8-13, beta 14-30, gamma 31-50 Hz.
inline std::vector<BandSpec> default_bands() {
  return {{"delta", 1, 3}, {"theta", 4, 7}, {"alpha", 8, 13}, {"beta", 14, 30}, {"gamma", 31, 50}};
}

inline void validate_bands(const std::vector<BandSpec>& bands) {
  if (bands.empty()) throw Error("bands: empty band list");
  for (const auto& b : bands)
    if (!(b.low_hz > 0.0) || !(b.low_hz <= b.high_hz))
      throw Error("bands: '" + b.name + "' needs 0 < low <= high");
}

/// w_n = 0.5 (1 - cos(2 pi n / (N - 1)))
inline const std::vector<double>& hanning_window() {
  static const std::vector<double> w = [] {
    std::vector<double> v(kFrameLength);
    for (std::size_t n = 0; n < kFrameLength; ++n)
      v[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                   static_cast<double>(kFrameLength - 1)));
    return v;
  }();
  return w;
}

namespace detail {
// One r2c plan shared by all callers; planning is serialized, execution with
// caller-owned arrays is thread-safe in FFTW.
inline fftw_plan frame_plan() {
  static std::mutex mu;
  static fftw_plan plan = nullptr;
  std::lock_guard lock(mu);
  if (!plan) {
    std::vector<double> in(kFrameLength);
    std::vector<std::complex<double>> out(kSpectrumBins);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(kFrameLength), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  return plan;
}
}  // namespace detail

/// |DFT(w * x)|^2 at the 129 nonnegative frequencies of a 256-sample frame.
inline std::vector<double> stft_frame(std::span<const double> frame) {
  if (frame.size() != kFrameLength)
    throw ShapeError("stft_frame: expected " + std::to_string(kFrameLength) + " samples, got " +
                     std::to_string(frame.size()));
  const auto& w = hanning_window();
  std::vector<double> in(kFrameLength);
  for (std::size_t n = 0; n < kFrameLength; ++n) in[n] = w[n] * frame[n];
  std::vector<std::complex<double>> out(kSpectrumBins);
  fftw_execute_dft_r2c(detail::frame_plan(), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  std::vector<double> power(kSpectrumBins);
  for (std::size_t k = 0; k < kSpectrumBins; ++k) power[k] = std::norm(out[k]);
  return power;
}

/// Mean power over the bins whose centre frequency lies in [low, high].
inline double band_power(std::span<const double> power, const BandSpec& band, double sample_rate) {
  if (power.size() != kSpectrumBins) throw ShapeError("band_power: expected a 129-bin spectrum");
  const double bin_hz = sample_rate / static_cast<double>(kFrameLength);
  if (band.high_hz > sample_rate / 2.0) throw Error("band '" + band.name + "' exceeds the Nyquist frequency");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (f >= band.low_hz && f <= band.high_hz) {
      sum += power[k];
      ++n;
    }
  }
  if (n == 0) throw Error("band '" + band.name + "' contains no frequency bin");
  return sum / static_cast<double>(n);
}

/// Differential entropy of a Gaussian with variance equal to the mean band
/// power: 0.5 ln(2 pi e P). Zero power is floored at 1e-12 and flagged.
inline double de_feature(std::span<const double> power, const BandSpec& band, double sample_rate = 256.0,
                         bool* floored = nullptr) {
  double p = band_power(power, band, sample_rate);
  const bool hit = !(p > 0.0);
  if (hit) p = kBandPowerFloor;
  if (floored) *floored = hit;
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * p);
}

/// Block-average integer decimation.
inline std::vector<double> decimate(std::span<const double> signal, std::size_t factor) {
  if (factor == 0) throw Error("decimate: factor must be >= 1");
  std::vector<double> out;
  out.reserve(signal.size() / factor);
  for (std::size_t start = 0; start + factor <= signal.size(); start += factor) {
    double acc = 0.0;
    for (std::size_t i = 0; i < factor; ++i) acc += signal[start + i];
    out.push_back(acc / static_cast<double>(factor));
  }
  return out;
}

/// Differential entropy per (channel, band, 1 s step).
class BandSeries {
public:
  BandSeries() = default;
  BandSeries(std::size_t channels, std::size_t bands, std::size_t steps)
      : channels_(channels), bands_(bands), steps_(steps), values_(channels * bands * steps) {}

  std::size_t channels() const noexcept { return channels_; }
  std::size_t bands() const noexcept { return bands_; }
  std::size_t steps() const noexcept { return steps_; }

  double& at(std::size_t c, std::size_t b, std::size_t s) noexcept { return values_[(c * bands_ + b) * steps_ + s]; }
  double at(std::size_t c, std::size_t b, std::size_t s) const noexcept {
    return values_[(c * bands_ + b) * steps_ + s];
  }

  std::size_t floored = 0;  // band powers that hit the floor

private:
  std::size_t channels_ = 0, bands_ = 0, steps_ = 0;
  std::vector<double> values_;
};

/// Non-overlapping 256-sample frames per channel, one DE value per band.
inline BandSeries extract_band_series(const std::vector<std::vector<double>>& channels,
                                      const std::vector<BandSpec>& bands, double sample_rate = 256.0) {
  validate_bands(bands);
  if (channels.empty()) throw Error("extract: no channels");
  const std::size_t samples = channels.front().size();
  for (const auto& c : channels)
    if (c.size() != samples) throw ShapeError("extract: channels differ in length");
  const std::size_t steps = samples / kFrameLength;
  BandSeries series(channels.size(), bands.size(), steps);
  for (std::size_t c = 0; c < channels.size(); ++c)
    for (std::size_t s = 0; s < steps; ++s) {
      const auto power =
          stft_frame(std::span<const double>(channels[c]).subspan(s * kFrameLength, kFrameLength));
      for (std::size_t b = 0; b < bands.size(); ++b) {
        bool floored = false;
        series.at(c, b, s) = de_feature(power, bands[b], sample_rate, &floored);
        series.floored += floored;
      }
    }
  return series;
}

/// Windows of `width` consecutive steps, advanced by one step; each window
/// represents its centre step. Channel c is placed on occupied cell c of the
/// layout; empty cells stay zero.
inline std::vector<Volume> slice_windows(const BandSeries& series, const GridLayout& layout, std::size_t width,
                                         std::string* warning = nullptr) {
  if (width == 0) throw Error("slice_windows: width must be >= 1");
  if (series.channels() != layout.cell_count())
    throw ShapeError("slice_windows: " + std::to_string(series.channels()) + " channels vs " +
                     std::to_string(layout.cell_count()) + " occupied cells");
  std::vector<Volume> out;
  if (series.steps() < width) {
    if (warning)
      *warning = "series has " + std::to_string(series.steps()) + " steps, fewer than window width " +
                 std::to_string(width) + "; no windows produced";
    return out;
  }
  const VolumeDims dims{width, layout.height(), layout.width(), series.bands()};
  const auto& cells = layout.cells();
  for (std::size_t start = 0; start + width <= series.steps(); ++start) {
    Volume v(dims);
    for (std::size_t t = 0; t < width; ++t)
      for (std::size_t c = 0; c < cells.size(); ++c) {
        auto x = v.at(t, cells[c].row, cells[c].col);
        for (std::size_t b = 0; b < series.bands(); ++b) x[b] = series.at(c, b, start + t);
      }
    out.push_back(std::move(v));
  }
  return out;
}

/// Centre step (zero-based) represented by window `index`.
inline std::size_t window_center(std::size_t index, std::size_t width) { return index + width / 2; }

}  // namespace strnn
