#pragma once

#include <cstdint>
#include <vector>

#include "sonilab/rng.hpp"
#include "sonilab/types.hpp"

namespace sonilab::eval {

/// Planted-signal EEG generator used as a verification oracle.
struct SyntheticSpec {
  std::size_t n_epochs = 400;
  double balance = 0.5;          // fraction of High-CL epochs
  double effect = 0.8;           // High: frontal alpha x (1 - effect), theta x (1 + effect)
  double noise_exponent = 1.0;   // background spectrum 1/f^exponent
  std::uint64_t seed = 0;
  double noise_uv = 10.0;        // background std per channel
  double alpha_uv = 6.0;         // 10 Hz rhythm amplitude
  double theta_uv = 4.0;         // 6 Hz rhythm amplitude
  double jitter = 0.35;          // log-normal sd of per-epoch rhythm amplitudes
  /// Six-parameter mode: epochs cycle through the six parameters and take
  /// their CL from the parameter (Noise/Pitch/Rough/AudioComb High,
  /// Visual/VisualComb Low); `balance` is ignored.
  bool six_parameters = false;
  std::size_t participants = 4;
};

inline constexpr double kAlphaHz = 10.0;
inline constexpr double kThetaHz = 6.0;

void validate(const SyntheticSpec& spec);

/// Seeded, deterministic. Focus levels cycle 1..10 within each parameter.
std::vector<Epoch> synth_dataset(const SyntheticSpec& spec);

/// Parameter-level CL used by the similarity study.
CognitiveLoad similarity_cluster(Parameter p);

/// Pink-type noise with power spectrum ~ 1/f^exponent, zero mean, unit std.
std::vector<double> colored_noise(std::size_t n, double exponent, Rng& rng);

}  // namespace sonilab::eval
