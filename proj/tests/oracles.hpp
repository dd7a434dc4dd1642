#pragma once

// Reference computations that share no code with the library. Slow and
// simple on purpose.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "sonilab/nn/ops.hpp"
#include "sonilab/nn/tensor.hpp"

namespace oracle {

/// Magnitude of a digital Butterworth bandpass obtained by bilinear transform
/// of an order-n lowpass prototype: 1 / sqrt(1 + x^(2n)) with
/// x = (W^2 - W0^2) / (W * B), W = tan(pi f / fs).
inline double butterworth_bandpass_gain(double hz, int order, double low_hz, double high_hz, double fs) {
  const double pi = std::numbers::pi;
  const double w = std::tan(pi * hz / fs);
  const double wl = std::tan(pi * low_hz / fs), wh = std::tan(pi * high_hz / fs);
  const double x = (w * w - wl * wh) / (w * (wh - wl));
  return 1.0 / std::sqrt(1.0 + std::pow(x * x, order));
}

inline double db(double gain) { return 20.0 * std::log10(gain); }

/// O(n^2) DFT of a real signal, bins 0..n/2.
inline std::vector<std::complex<double>> naive_rdft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t % n) / double(n));
    out[k] = acc;
  }
  return out;
}

/// Geometric over arithmetic mean of a power spectrum, skipping DC.
inline double spectral_flatness(std::span<const double> power) {
  double log_sum = 0.0, sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 1; k < power.size(); ++k) {
    const double p = std::max(power[k], 1e-300);
    log_sum += std::log(p);
    sum += p;
    ++n;
  }
  return std::exp(log_sum / double(n)) / (sum / double(n));
}

/// Index of the largest entry in [lo, hi).
inline std::size_t argmax(std::span<const double> v, std::size_t lo = 0, std::size_t hi = SIZE_MAX) {
  hi = std::min(hi, v.size());
  return static_cast<std::size_t>(std::max_element(v.begin() + lo, v.begin() + hi) - v.begin());
}

/// Exact SVM dual optimum by enumerating every assignment of each multiplier
/// to {0, free, C}; feasible for n <= ~10. Returns the best objective
/// sum(a) - 0.5 a'Qa over KKT-consistent assignments.
inline double brute_force_svm_dual(const Eigen::MatrixXd& kernel, std::span<const int> sign, double c) {
  const int n = static_cast<int>(sign.size());
  Eigen::MatrixXd q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = sign[i] * sign[j] * kernel(i, j);
  std::vector<int> state(n, 0);  // 0 zero, 1 free, 2 at C
  double best = -1e300;
  for (;;) {
    std::vector<int> free;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    double fixed_balance = 0.0;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) free.push_back(i);
      if (state[i] == 2) {
        alpha[i] = c;
        fixed_balance += sign[i] * c;
      }
    }
    bool ok = true;
    if (!free.empty()) {
      const int m = static_cast<int>(free.size());
      Eigen::MatrixXd a(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      for (int r = 0; r < m; ++r) {
        for (int s = 0; s < m; ++s) a(r, s) = q(free[r], free[s]);
        a(r, m) = sign[free[r]];
        a(m, r) = sign[free[r]];
        double fixed = 0.0;
        for (int j = 0; j < n; ++j)
          if (state[j] == 2) fixed += q(free[r], j) * c;
        rhs[r] = 1.0 - fixed;
      }
      a(m, m) = 0.0;
      rhs[m] = -fixed_balance;
      const Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
      if (!(a * sol).isApprox(rhs, 1e-9)) ok = false;
      for (int r = 0; ok && r < m; ++r) {
        if (sol[r] < -1e-12 || sol[r] > c + 1e-12) ok = false;
        alpha[free[r]] = std::clamp(sol[r], 0.0, c);
      }
    } else if (std::abs(fixed_balance) > 1e-12) {
      ok = false;
    }
    if (ok) {
      double balance = 0.0;
      for (int i = 0; i < n; ++i) balance += sign[i] * alpha[i];
      if (std::abs(balance) < 1e-9) best = std::max(best, alpha.sum() - 0.5 * alpha.dot(q * alpha));
    }
    int i = 0;
    while (i < n && state[i] == 2) state[i++] = 0;
    if (i == n) break;
    ++state[i];
  }
  return best;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

inline constexpr double kFdStep = 1e-5;
/// Relative error denominator floor: gradients smaller than this are judged
/// on absolute error, where central differences carry ~1e-10 noise.
inline constexpr double kFdFloor = 1e-2;

/// Central-difference check of d loss / d leaf for up to `per_leaf` entries
/// of every leaf (evenly spaced). `loss` must rebuild the graph from the
/// leaves' current values and be deterministic. Stencils whose +/- points
/// take a different piecewise-linear branch than the centre are skipped.
inline GradCheck check_gradients(const std::function<sonilab::nn::Tensor()>& loss,
                                 const std::vector<sonilab::nn::Tensor>& leaves, std::size_t per_leaf = 24) {
  using sonilab::nn::KinkMonitor;
  GradCheck out;
  KinkMonitor::enable(true);
  for (const auto& leaf : leaves) leaf.zero_grad();
  KinkMonitor::reset();
  auto l = loss();
  const auto centre = KinkMonitor::fingerprint();
  l.backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& leaf : leaves) {
    analytic.emplace_back(leaf.grad().begin(), leaf.grad().end());
    analytic.back().resize(leaf.size(), 0.0);
  }

  for (std::size_t t = 0; t < leaves.size(); ++t) {
    auto values = leaves[t].mutable_data();
    const std::size_t n = values.size();
    const std::size_t stride = std::max<std::size_t>(1, n / per_leaf);
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = values[i];
      values[i] = saved + kFdStep;
      KinkMonitor::reset();
      const double up = loss().item();
      const auto fp_up = KinkMonitor::fingerprint();
      values[i] = saved - kFdStep;
      KinkMonitor::reset();
      const double down = loss().item();
      const auto fp_down = KinkMonitor::fingerprint();
      values[i] = saved;
      if (fp_up != centre || fp_down != centre) {
        ++out.skipped_kinks;
        continue;
      }
      const double numeric = (up - down) / (2.0 * kFdStep);
      const double a = analytic[t][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kFdFloor});
      out.max_rel_error = std::max(out.max_rel_error, rel);
      ++out.checked;
    }
  }
  KinkMonitor::enable(false);
  return out;
}

}  // namespace oracle
