#include "sonilab/eval/synthetic.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "sonilab/error.hpp"
#include "sonilab/fft.hpp"
#include "sonilab/layout.hpp"
#include "sonilab/rng.hpp"

namespace sonilab::eval {
namespace {

constexpr std::array<std::string_view, 4> kFrontal = {"AF3", "AF4", "F3", "F4"};
constexpr std::array<std::string_view, 4> kPosterior = {"O1", "O2", "P7", "P8"};

bool member(std::string_view name, std::span<const std::string_view> set) {
  for (auto s : set)
    if (s == name) return true;
  return false;
}

}  // namespace

void validate(const SyntheticSpec& s) {
  if (s.n_epochs == 0) throw_usage("bad_synthetic_spec", "n_epochs must be positive");
  if (!(s.balance > 0.0 && s.balance < 1.0)) throw_usage("bad_synthetic_spec", "balance must be in (0,1)");
  if (!(s.effect >= 0.0)) throw_usage("bad_synthetic_spec", "effect must be >= 0");
  if (!(s.noise_exponent >= 0.0)) throw_usage("bad_synthetic_spec", "noise exponent must be >= 0");
  if (!(s.noise_uv >= 0.0 && s.alpha_uv >= 0.0 && s.theta_uv >= 0.0 && s.jitter >= 0.0))
    throw_usage("bad_synthetic_spec", "amplitudes and jitter must be >= 0");
  if (s.participants == 0) throw_usage("bad_synthetic_spec", "participants must be positive");
}

CognitiveLoad similarity_cluster(Parameter p) {
  return has_image(p) ? CognitiveLoad::Low : CognitiveLoad::High;
}

std::vector<double> colored_noise(std::size_t n, double exponent, Rng& rng) {
  std::vector<double> white(n);
  for (auto& v : white) v = rng.normal();
  auto bins = rfft(white);
  bins[0] = 0.0;
  for (std::size_t k = 1; k < bins.size(); ++k) bins[k] *= std::pow(static_cast<double>(k), -exponent / 2.0);
  auto x = irfft(bins, n);
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (sd > 0.0)
    for (auto& v : x) v /= sd;
  return x;
}

std::vector<Epoch> synth_dataset(const SyntheticSpec& spec) {
  validate(spec);
  const auto& layout = default_layout();
  Rng rng(spec.seed);

  const std::size_t n = spec.n_epochs;
  std::vector<CognitiveLoad> classes(n, CognitiveLoad::Low);
  std::vector<Parameter> params(n);
  if (spec.six_parameters) {
    for (std::size_t i = 0; i < n; ++i) {
      params[i] = kAllParameters[i % kAllParameters.size()];
      classes[i] = similarity_cluster(params[i]);
    }
  } else {
    const auto high = static_cast<std::size_t>(std::lround(spec.balance * static_cast<double>(n)));
    for (std::size_t i = 0; i < high; ++i) classes[i] = CognitiveLoad::High;
    rng.shuffle(classes);
    for (std::size_t i = 0; i < n; ++i) params[i] = kAllParameters[i % kAllParameters.size()];
  }

  std::vector<Epoch> out;
  out.reserve(n);
  const double dt = 1.0 / kEegSampleRate;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    EpochLabels labels;
    labels.cl_label = classes[i];
    labels.parameter = params[i];
    labels.focus_level = static_cast<int>((i / kAllParameters.size()) % kLevelCount) + 1;
    labels.session = SessionKind::IR;
    labels.participant = "S" + std::to_string(i % spec.participants + 1);
    Epoch e = make_epoch(labels);

    const bool high = classes[i] == CognitiveLoad::High;
    const double alpha_gain = std::exp(spec.jitter * rng.normal());
    const double theta_gain = std::exp(spec.jitter * rng.normal());
    const double alpha_phase = rng.uniform(0.0, two_pi);
    const double theta_phase = rng.uniform(0.0, two_pi);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const auto& name = layout.names[c];
      const bool frontal = member(name, kFrontal);
      double alpha = spec.alpha_uv * alpha_gain * (member(name, kPosterior) ? 1.0 : 0.6);
      double theta = spec.theta_uv * theta_gain * (frontal ? 1.0 : 0.5);
      if (high && frontal) {
        alpha *= std::max(0.0, 1.0 - spec.effect);
        theta *= 1.0 + spec.effect;
      }
      const double a_phase = alpha_phase + 0.3 * rng.normal();
      const double t_phase = theta_phase + 0.3 * rng.normal();
      const auto noise = colored_noise(kEpochSamples, spec.noise_exponent, rng);
      for (std::size_t s = 0; s < kEpochSamples; ++s) {
        const double t = static_cast<double>(s) * dt;
        const double v = spec.noise_uv * noise[s] + alpha * std::sin(two_pi * kAlphaHz * t + a_phase) +
                         theta * std::sin(two_pi * kThetaHz * t + t_phase);
        if (s < kFixationSamples) e.fixation(c, s) = v;
        else e.stimulus(c, s - kFixationSamples) = v;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace sonilab::eval
