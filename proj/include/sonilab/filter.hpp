#pragma once

#include <complex>
#include <span>
#include <vector>

#include "sonilab/types.hpp"

namespace sonilab {

/// Butterworth bandpass. `order` is the order of the lowpass prototype, so
/// the realized filter has 2*order poles arranged as `order` biquads.
struct FilterSpec {
  int order = 6;
  double low_hz = 0.1;
  double high_hz = 45.0;
  double sample_rate = kEegSampleRate;
};

/// Second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

struct SosFilter {
  std::vector<Biquad> sections;
  double sample_rate = kEegSampleRate;
};

/// Throws Error{Usage, "bad_cutoff"} unless 0 < low < high < fs/2, and
/// Error{Numeric, "unstable_filter"} if any realized pole is on or outside
/// the unit circle.
SosFilter design_butterworth_bandpass(const FilterSpec& spec);

std::vector<std::complex<double>> filter_poles(const SosFilter& filter);
bool is_stable(const SosFilter& filter);

/// Complex response of the cascade at `hz` (single pass).
std::complex<double> frequency_response(const SosFilter& filter, double hz);

/// Causal filtering in transposed direct form II, starting from the
/// steady-state response to a constant `initial` input.
std::vector<double> sos_filter(const SosFilter& filter, std::span<const double> x, double initial);

/// Zero-phase forward-backward filtering with odd reflection padding.
/// Throws Error{Data, "signal_too_short"} when x.size() <= pad.
std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x,
                             std::size_t pad = 64);

}  // namespace sonilab
