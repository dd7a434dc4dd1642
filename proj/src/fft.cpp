#include "sonilab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace sonilab {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [n, plan] : plans) fftw_destroy_plan(plan);
  }

  // Planning is not thread-safe in FFTW; execution with new-array execute is.
  fftw_plan get(std::size_t n, bool inverse) {
    std::lock_guard lock(mutex);
    auto it = plans.find({n, inverse});
    if (it != plans.end()) return it->second;
    double* real = fftw_alloc_real(n);
    fftw_complex* cplx = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = inverse ? fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, flags)
                             : fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, flags);
    fftw_free(real);
    fftw_free(cplx);
    plans.emplace(std::make_pair(n, inverse), plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n == 0) return {};
  fftw_plan plan = cache().get(n, false);
  std::vector<double> in(signal.begin(), signal.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n) {
  if (n == 0) return {};
  if (bins.size() != n / 2 + 1) throw std::invalid_argument("irfft: bin count must be n/2 + 1");
  fftw_plan plan = cache().get(n, true);
  std::vector<std::complex<double>> in(bins.begin(), bins.end());  // c2r overwrites its input
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  for (auto& v : out) v /= static_cast<double>(n);
  return out;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

}  // namespace sonilab
