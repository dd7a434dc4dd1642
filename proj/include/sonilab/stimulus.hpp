#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sonilab/matrix.hpp"
#include "sonilab/types.hpp"

namespace sonilab {

inline constexpr double kDefaultAudioRate = 44100.0;
inline constexpr double kStimulusSeconds = 2.0;
inline constexpr double kCarrierHz = 1000.0;
inline constexpr double kStimulusRms = 0.1;

/// C-major notes from C4 to E6, indices round(i * 16 / 9) over the 17-note run.
inline constexpr std::array<double, 10> kPitchLadderHz = {
    261.63, 329.63, 392.00, 440.00, 523.25, 659.25, 783.99, 880.00, 1046.50, 1318.51};

/// Amplitude-modulation rates; entry k (0-based) is used by focus level 10 - k.
inline constexpr std::array<double, 10> kModulationRatesHz = {0, 2, 4, 7, 11, 16, 23, 34, 49, 70};

struct AudioBuffer {
  double sample_rate = kDefaultAudioRate;
  std::vector<double> samples;  // mono, [-1, 1]

  bool operator==(const AudioBuffer&) const = default;
};

struct StimulusSpec {
  Parameter parameter = Parameter::Noise;
  int focus_level = 1;
  double carrier_hz = kCarrierHz;
  double am_rate_hz = 0.0;
  double tone_weight = 0.0;  // fraction of pure tone in the noise/tone blend
};

/// Throws Error{Usage, "level_range"} for levels outside [1, 10].
void check_level(int level);

double modulation_rate_for_level(int level);
double tone_weight_for_level(int level);
double pitch_for_level(int level);
StimulusSpec stimulus_spec(Parameter parameter, int level);

AudioBuffer synth_noise(int level, double sample_rate = kDefaultAudioRate,
                        double duration = kStimulusSeconds, std::uint64_t seed = 0);
AudioBuffer synth_pitch(int level, double sample_rate = kDefaultAudioRate,
                        double duration = kStimulusSeconds);
AudioBuffer synth_rough(int level, double sample_rate = kDefaultAudioRate,
                        double duration = kStimulusSeconds);
AudioBuffer synth_audiocomb(int level, double sample_rate = kDefaultAudioRate,
                            double duration = kStimulusSeconds, std::uint64_t seed = 0);

/// Audio for any parameter with a sound component (VisualComb uses the
/// AudioComb ladder). Throws Error{Usage, "no_audio"} for Visual.
AudioBuffer synth_audio(Parameter parameter, int level, double sample_rate = kDefaultAudioRate,
                        double duration = kStimulusSeconds, std::uint64_t seed = 0);

/// Grayscale image, values in [0, 255]. Gaussian blur with
/// sigma = 1.5 * (10 - level), kernel width 2*ceil(3*sigma)+1, edges clamped.
/// Level 10 returns the input unchanged.
Matrix blur_image(const Matrix& image, int level);

/// Procedural stand-in for the astronomical target image.
Matrix reference_image(std::size_t size = 128, std::uint64_t seed = 1);

}  // namespace sonilab
