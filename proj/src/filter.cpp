#include "sonilab/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sonilab/error.hpp"

namespace sonilab {

namespace {

using cd = std::complex<double>;

cd section_response(const Biquad& s, cd z_inv) {
  const cd num = s.b0 + s.b1 * z_inv + s.b2 * z_inv * z_inv;
  const cd den = 1.0 + s.a1 * z_inv + s.a2 * z_inv * z_inv;
  return num / den;
}

}  // namespace

SosFilter design_butterworth_bandpass(const FilterSpec& spec) {
  const double nyquist = spec.sample_rate / 2.0;
  if (spec.order < 1) throw_usage("bad_order", "filter order must be >= 1");
  if (!(spec.low_hz > 0.0) || !(spec.low_hz < spec.high_hz) || !(spec.high_hz < nyquist))
    throw_usage("bad_cutoff", "bandpass edges must satisfy 0 < low < high < fs/2");

  const double pi = std::numbers::pi;
  // Prewarped analog edges for the bilinear map s = (z - 1) / (z + 1).
  const double wl = std::tan(pi * spec.low_hz / spec.sample_rate);
  const double wh = std::tan(pi * spec.high_hz / spec.sample_rate);
  const double bw = wh - wl;
  const double w0sq = wl * wh;

  std::vector<cd> complex_poles;
  std::vector<double> real_poles;
  const int n = spec.order;
  for (int k = 1; k <= n; ++k) {
    const cd proto = std::polar(1.0, pi * (2.0 * k + n - 1) / (2.0 * n));
    // Lowpass-to-bandpass: s^2 - p*B*s + w0^2 = 0.
    const cd disc = std::sqrt(proto * proto * bw * bw - 4.0 * w0sq);
    for (const cd s : {(proto * bw + disc) / 2.0, (proto * bw - disc) / 2.0}) {
      const cd z = (1.0 + s) / (1.0 - s);
      if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) real_poles.push_back(z.real());
      else if (z.imag() > 0) complex_poles.push_back(z);
    }
  }
  if (real_poles.size() % 2 != 0 || complex_poles.size() + real_poles.size() / 2 != std::size_t(n))
    throw_numeric("unstable_filter", "pole pairing failed during filter design");

  SosFilter filter;
  filter.sample_rate = spec.sample_rate;
  for (const cd& z : complex_poles)
    filter.sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  for (std::size_t i = 0; i < real_poles.size(); i += 2)
    filter.sections.push_back(
        {1.0, 0.0, -1.0, -(real_poles[i] + real_poles[i + 1]), real_poles[i] * real_poles[i + 1]});

  // Unit gain at the geometric centre frequency, one section at a time.
  const double centre_hz = std::atan(std::sqrt(w0sq)) * spec.sample_rate / pi;
  const cd z_inv = std::polar(1.0, -2.0 * pi * centre_hz / spec.sample_rate);
  for (auto& s : filter.sections) {
    const double g = std::abs(section_response(s, z_inv));
    s.b0 /= g;
    s.b1 /= g;
    s.b2 /= g;
  }
  if (!is_stable(filter)) throw_numeric("unstable_filter", "designed filter has poles outside the unit circle");
  return filter;
}

std::vector<std::complex<double>> filter_poles(const SosFilter& filter) {
  std::vector<cd> poles;
  for (const auto& s : filter.sections) {
    const cd disc = std::sqrt(cd(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    poles.push_back((-s.a1 + disc) / 2.0);
    poles.push_back((-s.a1 - disc) / 2.0);
  }
  return poles;
}

bool is_stable(const SosFilter& filter) {
  for (const cd& p : filter_poles(filter))
    if (!(std::abs(p) < 1.0)) return false;
  return true;
}

std::complex<double> frequency_response(const SosFilter& filter, double hz) {
  const cd z_inv = std::polar(1.0, -2.0 * std::numbers::pi * hz / filter.sample_rate);
  cd h = 1.0;
  for (const auto& s : filter.sections) h *= section_response(s, z_inv);
  return h;
}

std::vector<double> sos_filter(const SosFilter& filter, std::span<const double> x, double initial) {
  std::vector<double> y(x.begin(), x.end());
  double level = initial;  // steady-state input level seen by the current section
  for (const auto& s : filter.sections) {
    const double dc_gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double out_level = dc_gain * level;
    double z2 = s.b2 * level - s.a2 * out_level;
    double z1 = s.b1 * level - s.a1 * out_level + z2;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level = out_level;
  }
  return y;
}

std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  if (n <= pad) throw_data("signal_too_short", "signal must be longer than the padding");
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  auto forward = sos_filter(filter, ext, ext.front());
  std::reverse(forward.begin(), forward.end());
  auto backward = sos_filter(filter, forward, forward.front());
  std::reverse(backward.begin(), backward.end());
  return {backward.begin() + static_cast<std::ptrdiff_t>(pad),
          backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace sonilab
