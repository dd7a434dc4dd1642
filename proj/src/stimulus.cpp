#include "sonilab/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sonilab/error.hpp"
#include "sonilab/rng.hpp"

namespace sonilab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t sample_count(double sample_rate, double duration) {
  if (!(sample_rate > 0.0) || !(duration > 0.0))
    throw_usage("bad_audio_format", "sample rate and duration must be positive");
  return static_cast<std::size_t>(std::llround(sample_rate * duration));
}

void normalize(std::vector<double>& s) {
  double energy = 0.0;
  for (double v : s) energy += v * v;
  const double rms = std::sqrt(energy / static_cast<double>(s.size()));
  if (rms > 0.0) {
    const double gain = kStimulusRms / rms;
    for (double& v : s) v *= gain;
  }
  for (double& v : s) v = std::clamp(v, -1.0, 1.0);
}

// Shared path for noise, roughness and their combination: blend a unit-RMS
// carrier with unit-variance white noise, then apply the full-depth AM
// envelope. Sharing it keeps the degenerate levels bit-identical.
AudioBuffer modulated_blend(double tone_weight, double am_rate, double sample_rate,
                            double duration, std::uint64_t seed) {
  const std::size_t n = sample_count(sample_rate, duration);
  AudioBuffer out{sample_rate, std::vector<double>(n)};
  Rng rng(seed);
  const double noise_weight = 1.0 - tone_weight;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double s = tone_weight * std::numbers::sqrt2 * std::sin(kTwoPi * kCarrierHz * t);
    if (noise_weight > 0.0) s += noise_weight * rng.normal();
    if (am_rate > 0.0) s *= 0.5 * (1.0 + std::sin(kTwoPi * am_rate * t));
    out.samples[i] = s;
  }
  normalize(out.samples);
  return out;
}

}  // namespace

void check_level(int level) {
  if (level < 1 || level > kLevelCount)
    throw_usage("level_range", "focus level " + std::to_string(level) + " outside [1,10]");
}

double modulation_rate_for_level(int level) {
  check_level(level);
  return kModulationRatesHz[static_cast<std::size_t>(kLevelCount - level)];
}

double tone_weight_for_level(int level) {
  check_level(level);
  return static_cast<double>(level - 1) / 9.0;
}

double pitch_for_level(int level) {
  check_level(level);
  return kPitchLadderHz[static_cast<std::size_t>(level - 1)];
}

StimulusSpec stimulus_spec(Parameter parameter, int level) {
  check_level(level);
  StimulusSpec spec{parameter, level, kCarrierHz, 0.0, 1.0};
  switch (parameter) {
    case Parameter::Noise:
      spec.tone_weight = tone_weight_for_level(level);
      break;
    case Parameter::Pitch:
      spec.carrier_hz = pitch_for_level(level);
      break;
    case Parameter::Rough:
      spec.am_rate_hz = modulation_rate_for_level(level);
      break;
    case Parameter::AudioComb:
    case Parameter::VisualComb:
      spec.tone_weight = tone_weight_for_level(level);
      spec.am_rate_hz = modulation_rate_for_level(level);
      break;
    case Parameter::Visual:
      break;
  }
  return spec;
}

AudioBuffer synth_noise(int level, double sample_rate, double duration, std::uint64_t seed) {
  return modulated_blend(tone_weight_for_level(level), 0.0, sample_rate, duration, seed);
}

AudioBuffer synth_pitch(int level, double sample_rate, double duration) {
  const double f = pitch_for_level(level);
  const std::size_t n = sample_count(sample_rate, duration);
  AudioBuffer out{sample_rate, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i)
    out.samples[i] = std::sin(kTwoPi * f * static_cast<double>(i) / sample_rate);
  normalize(out.samples);
  return out;
}

AudioBuffer synth_rough(int level, double sample_rate, double duration) {
  return modulated_blend(1.0, modulation_rate_for_level(level), sample_rate, duration, 0);
}

AudioBuffer synth_audiocomb(int level, double sample_rate, double duration, std::uint64_t seed) {
  return modulated_blend(tone_weight_for_level(level), modulation_rate_for_level(level),
                         sample_rate, duration, seed);
}

AudioBuffer synth_audio(Parameter parameter, int level, double sample_rate, double duration,
                        std::uint64_t seed) {
  switch (parameter) {
    case Parameter::Noise: return synth_noise(level, sample_rate, duration, seed);
    case Parameter::Pitch: return synth_pitch(level, sample_rate, duration);
    case Parameter::Rough: return synth_rough(level, sample_rate, duration);
    case Parameter::AudioComb:
    case Parameter::VisualComb: return synth_audiocomb(level, sample_rate, duration, seed);
    case Parameter::Visual: break;
  }
  throw_usage("no_audio", "Visual stimuli have no audio component");
}

Matrix blur_image(const Matrix& image, int level) {
  check_level(level);
  if (image.empty()) throw_usage("empty_image", "cannot blur an empty image");
  if (level == kLevelCount) return image;

  const double sigma = 1.5 * (kLevelCount - level);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += kernel[k + radius];
  }
  for (double& w : kernel) w /= total;

  const int rows = static_cast<int>(image.rows());
  const int cols = static_cast<int>(image.cols());
  Matrix tmp(image.rows(), image.cols());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * image(r, std::clamp(c + k, 0, cols - 1));
      tmp(r, c) = acc;
    }
  Matrix out(image.rows(), image.cols());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp(std::clamp(r + k, 0, rows - 1), c);
      out(r, c) = acc;
    }
  return out;
}

Matrix reference_image(std::size_t size, std::uint64_t seed) {
  Matrix img(size, size);
  Rng rng(seed);
  const double centre = 0.5 * static_cast<double>(size - 1);
  const double scale = static_cast<double>(size);
  // Two-armed spiral with an exponential bulge.
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) {
      const double x = (static_cast<double>(c) - centre) / scale;
      const double y = (static_cast<double>(r) - centre) / scale;
      const double rad = std::hypot(x, y);
      const double ang = std::atan2(y, x);
      const double bulge = std::exp(-rad * rad / 0.004);
      const double arms = std::pow(0.5 + 0.5 * std::cos(2.0 * ang - 18.0 * rad), 4.0) *
                          std::exp(-rad / 0.18);
      img(r, c) = 255.0 * std::min(1.0, 0.9 * bulge + 0.6 * arms);
    }
  const std::size_t stars = size * size / 200;
  for (std::size_t s = 0; s < stars; ++s) {
    const auto r = static_cast<std::size_t>(rng.below(size));
    const auto c = static_cast<std::size_t>(rng.below(size));
    img(r, c) = std::max(img(r, c), 150.0 + 105.0 * rng.uniform());
  }
  return img;
}

}  // namespace sonilab
