#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "sonilab/matrix.hpp"
#include "sonilab/types.hpp"

namespace sonilab {

struct Band {
  std::string_view name;
  double low_hz;
  double high_hz;
};

/// Gamma is capped at the 45 Hz preprocessing edge.
inline constexpr std::array<Band, 5> kBands = {{{"delta", 1.0, 4.0},
                                                {"theta", 4.0, 8.0},
                                                {"alpha", 8.0, 12.0},
                                                {"beta", 12.0, 30.0},
                                                {"gamma", 30.0, 45.0}}};
inline constexpr std::size_t kBandCount = kBands.size();
inline constexpr std::size_t kPsdLength = kChannelCount * kBandCount;

/// One-sided power spectral density estimate.
struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> density;  // uV^2 / Hz
};

/// Welch estimate: Hann windows of `segment` samples, `overlap` shared
/// samples, per-segment mean removal, density scaling, segment average.
Spectrum welch(std::span<const double> x, double sample_rate, std::size_t segment = 128,
               std::size_t overlap = 64);

/// Trapezoidal integral of the density over bins with low <= f <= high.
double integrate_band(const Spectrum& s, double low_hz, double high_hz);

/// 70 band powers, channel-major (channel c, band b at c * 5 + b).
using PsdVector = std::vector<double>;
PsdVector welch_band_psd(const Epoch& epoch);

struct Spectrogram {
  std::size_t channels = kChannelCount;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t window = 64;
  std::size_t hop = 8;
  double bin_hz = 0.0;
  std::vector<double> db;  // channel x frame x bin

  double at(std::size_t c, std::size_t f, std::size_t b) const {
    return db[(c * frames + f) * bins + b];
  }
};

inline constexpr double kSpectrogramFloor = 1e-12;

/// Hann-windowed STFT magnitude in dB, 20*log10(|X| + 1e-12), per channel
/// over the stimulus segment. Throws Error{Usage, "bad_window"} when the
/// window is longer than the segment or hop is zero.
Spectrogram stft_spectrogram(const Epoch& epoch, std::size_t window = 64, std::size_t hop = 8);

/// CNN input: each channel's frame x bin image min-max scaled to [0, 1]
/// (constant images map to 0), laid out channel x frame x bin.
std::vector<double> spectrogram_image(const Spectrogram& s);

/// Per-dimension standardization fitted on training rows only.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> scale;  // std floored at 1e-8
};

inline constexpr double kScaleFloor = 1e-8;

/// Rows are samples. Throws Error{Usage, "empty_training_set"}.
Normalizer zscore_fit(const Matrix& train);
Matrix zscore_apply(const Normalizer& normalizer, const Matrix& features);
void zscore_apply_inplace(const Normalizer& normalizer, std::span<double> row);

}  // namespace sonilab
