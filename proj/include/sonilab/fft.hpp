#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sonilab {

/// One-sided real FFT: returns n/2 + 1 unnormalized bins. Thread-safe.
std::vector<std::complex<double>> rfft(std::span<const double> signal);

/// Inverse of rfft for a length-n signal (normalized, so irfft(rfft(x)) == x).
std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n);

/// Periodic Hann window of length n (the DFT-even form used for spectral
/// estimation).
std::vector<double> hann_window(std::size_t n);

}  // namespace sonilab
