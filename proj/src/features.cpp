#include "sonilab/features.hpp"

#include <algorithm>
#include <cmath>

#include "sonilab/error.hpp"
#include "sonilab/fft.hpp"

namespace sonilab {

Spectrum welch(std::span<const double> x, double sample_rate, std::size_t segment,
               std::size_t overlap) {
  if (segment == 0 || overlap >= segment || x.size() < segment)
    throw_usage("bad_window", "Welch segment must fit the signal and exceed the overlap");
  const auto window = hann_window(segment);
  double window_power = 0.0;
  for (double w : window) window_power += w * w;
  const std::size_t step = segment - overlap;
  const std::size_t bins = segment / 2 + 1;

  Spectrum s;
  s.density.assign(bins, 0.0);
  s.freqs.resize(bins);
  for (std::size_t k = 0; k < bins; ++k)
    s.freqs[k] = static_cast<double>(k) * sample_rate / static_cast<double>(segment);

  std::size_t count = 0;
  std::vector<double> buf(segment);
  for (std::size_t start = 0; start + segment <= x.size(); start += step, ++count) {
    double mean = 0.0;
    for (std::size_t i = 0; i < segment; ++i) mean += x[start + i];
    mean /= static_cast<double>(segment);
    for (std::size_t i = 0; i < segment; ++i) buf[i] = (x[start + i] - mean) * window[i];
    const auto spec = rfft(buf);
    for (std::size_t k = 0; k < bins; ++k) s.density[k] += std::norm(spec[k]);
  }
  const double scale = 1.0 / (sample_rate * window_power * static_cast<double>(count));
  for (std::size_t k = 0; k < bins; ++k) {
    s.density[k] *= scale;
    const bool edge = k == 0 || (segment % 2 == 0 && k == bins - 1);
    if (!edge) s.density[k] *= 2.0;
  }
  return s;
}

double integrate_band(const Spectrum& s, double low_hz, double high_hz) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < s.freqs.size(); ++k) {
    const double f0 = s.freqs[k], f1 = s.freqs[k + 1];
    if (f0 >= low_hz && f1 <= high_hz) total += 0.5 * (s.density[k] + s.density[k + 1]) * (f1 - f0);
  }
  return total;
}

PsdVector welch_band_psd(const Epoch& epoch) {
  if (epoch.stimulus.rows() != kChannelCount || epoch.stimulus.cols() != kStimulusSamples)
    throw_data("epoch_shape", "stimulus segment must be 14 x 256");
  PsdVector out(kPsdLength);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const Spectrum s = welch(epoch.stimulus.row(c), kEegSampleRate);
    for (std::size_t b = 0; b < kBandCount; ++b)
      out[c * kBandCount + b] = integrate_band(s, kBands[b].low_hz, kBands[b].high_hz);
  }
  return out;
}

Spectrogram stft_spectrogram(const Epoch& epoch, std::size_t window, std::size_t hop) {
  const std::size_t length = epoch.stimulus.cols();
  if (window == 0 || window > length || hop == 0)
    throw_usage("bad_window", "STFT window must be in [1, segment length] and hop > 0");
  Spectrogram s;
  s.window = window;
  s.hop = hop;
  s.frames = (length - window) / hop + 1;
  s.bins = window / 2 + 1;
  s.bin_hz = kEegSampleRate / static_cast<double>(window);
  s.db.resize(s.channels * s.frames * s.bins);
  const auto w = hann_window(window);
  std::vector<double> buf(window);
  for (std::size_t c = 0; c < s.channels; ++c) {
    const auto row = epoch.stimulus.row(c);
    for (std::size_t f = 0; f < s.frames; ++f) {
      for (std::size_t i = 0; i < window; ++i) buf[i] = row[f * hop + i] * w[i];
      const auto spec = rfft(buf);
      for (std::size_t b = 0; b < s.bins; ++b)
        s.db[(c * s.frames + f) * s.bins + b] = 20.0 * std::log10(std::abs(spec[b]) + kSpectrogramFloor);
    }
  }
  return s;
}

std::vector<double> spectrogram_image(const Spectrogram& s) {
  std::vector<double> out(s.db.size());
  const std::size_t plane = s.frames * s.bins;
  for (std::size_t c = 0; c < s.channels; ++c) {
    const auto begin = s.db.begin() + static_cast<std::ptrdiff_t>(c * plane);
    const auto [lo, hi] = std::minmax_element(begin, begin + static_cast<std::ptrdiff_t>(plane));
    const double range = *hi - *lo;
    for (std::size_t i = 0; i < plane; ++i)
      out[c * plane + i] = range > 0.0 ? (s.db[c * plane + i] - *lo) / range : 0.0;
  }
  return out;
}

Normalizer zscore_fit(const Matrix& train) {
  if (train.rows() == 0) throw_usage("empty_training_set", "cannot fit a normalizer on zero rows");
  const std::size_t d = train.cols();
  const double n = static_cast<double>(train.rows());
  Normalizer z{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t r = 0; r < train.rows(); ++r)
    for (std::size_t j = 0; j < d; ++j) z.mean[j] += train(r, j);
  for (double& m : z.mean) m /= n;
  for (std::size_t r = 0; r < train.rows(); ++r)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = train(r, j) - z.mean[j];
      z.scale[j] += dev * dev;
    }
  for (double& s : z.scale) s = std::max(std::sqrt(s / n), kScaleFloor);
  return z;
}

void zscore_apply_inplace(const Normalizer& z, std::span<double> row) {
  if (row.size() != z.mean.size()) throw_usage("shape_mismatch", "feature width does not match normalizer");
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - z.mean[j]) / z.scale[j];
}

Matrix zscore_apply(const Normalizer& z, const Matrix& features) {
  Matrix out = features;
  for (std::size_t r = 0; r < out.rows(); ++r) zscore_apply_inplace(z, out.row(r));
  return out;
}

}  // namespace sonilab
