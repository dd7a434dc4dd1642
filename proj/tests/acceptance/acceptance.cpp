// Acceptance runner: one PASS/FAIL line per criterion.
//   sonilab_acceptance [name...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../gradient_suite.hpp"
#include "../oracles.hpp"
#include "../stimulus_checks.hpp"
#include "sonilab/config.hpp"
#include "sonilab/eval/cv.hpp"
#include "sonilab/eval/dataset.hpp"
#include "sonilab/eval/evaluate.hpp"
#include "sonilab/eval/labels.hpp"
#include "sonilab/eval/report.hpp"
#include "sonilab/eval/similarity.hpp"
#include "sonilab/eval/synthetic.hpp"
#include "sonilab/features.hpp"
#include "sonilab/fft.hpp"
#include "sonilab/filter.hpp"
#include "sonilab/layout.hpp"
#include "sonilab/preprocess.hpp"
#include "sonilab/rng.hpp"
#include "sonilab/stimulus.hpp"
#include "sonilab/topo.hpp"

using namespace sonilab;
using namespace sonilab::eval;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Failed checks show up in the detail prefixed with "!".
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " !" << what;
    }
  }
  template <typename T>
  void note(const std::string& key, T value) {
    detail << " " << key << "=" << value;
  }
};

struct Criterion {
  std::string name;
  double limit_s;
  std::function<void(Outcome&)> run;
};

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

AppConfig config(const char* name) { return load_config(std::string(SONILAB_CONFIG_DIR) + "/" + name); }

// ---- DSP ------------------------------------------------------------------

void dsp(Outcome& o) {
  const FilterSpec spec;
  const auto filter = design_butterworth_bandpass(spec);
  double worst = 0.0;
  for (double hz : {1.0, 10.0, 40.0}) {
    const double realized = oracle::db(std::abs(frequency_response(filter, hz)));
    const double analytic =
        oracle::db(oracle::butterworth_bandpass_gain(hz, spec.order, spec.low_hz, spec.high_hz, spec.sample_rate));
    worst = std::max(worst, std::abs(realized - analytic));
  }
  o.note("butterworth_max_db_err", fixed(worst, 5));
  o.check(spec.order == 6 && worst <= 0.5, "butterworth");

  Epoch e = make_epoch({});
  for (std::size_t c = 0; c < kChannelCount; ++c)
    for (std::size_t t = 0; t < kEpochSamples; ++t) {
      const double v = 50.0 * std::sin(2.0 * std::numbers::pi * 60.0 * double(t) / kEegSampleRate);
      (t < kFixationSamples ? e.fixation(c, t) : e.stimulus(c, t - kFixationSamples)) = v;
    }
  const Epoch out = bandpass(baseline_correct(e), spec);
  double attenuation = -INFINITY;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto in_bins = rfft(e.stimulus.row(c));
    const auto out_bins = rfft(out.stimulus.row(c));
    const std::size_t k = 120;  // 60 Hz at 0.5 Hz resolution
    attenuation = std::max(attenuation, oracle::db(std::abs(out_bins[k]) / std::abs(in_bins[k])));
  }
  o.note("line_noise_db", fixed(attenuation, 1));
  o.check(attenuation <= -40.0, "60hz_attenuation");

  std::vector<double> x(kStimulusSamples);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 20.0 * std::sin(2.0 * std::numbers::pi * 10.0 * double(t) / kEegSampleRate + 0.3);
  const auto s = welch(x, kEegSampleRate);
  const double share = integrate_band(s, kBands[2].low_hz, kBands[2].high_hz) / integrate_band(s, 0.0, kEegSampleRate / 2);
  o.note("alpha_share", fixed(share));
  o.check(share >= 0.9, "welch_alpha");
}

// ---- stimuli --------------------------------------------------------------

void stimuli(Outcome& o) {
  std::size_t passed = 0;
  std::string why;
  const auto record = [&](bool ok, const std::string& label) {
    if (ok) ++passed;
    else o.check(false, label + (why.empty() ? "" : "(" + why + ")"));
    why.clear();
  };
  for (int l = 1; l <= kLevelCount; ++l) {
    const auto s = stimcheck::power_spectrum(synth_pitch(l));
    record(stimcheck::peak_at(s, kPitchLadderHz[std::size_t(l - 1)], 1, &why), "pitch_L" + std::to_string(l));
  }
  for (int l = 1; l <= kLevelCount; ++l) {
    const auto s = stimcheck::power_spectrum(synth_rough(l));
    const double fm = modulation_rate_for_level(l);
    record(fm > 0 ? stimcheck::sidebands_at(s, fm, &why) : stimcheck::peak_at(s, kCarrierHz, 1, &why),
           "rough_L" + std::to_string(l));
  }
  double previous = INFINITY;
  for (int l = 1; l <= kLevelCount; ++l) {
    const double f = stimcheck::flatness(synth_noise(l));
    record(f < previous, "noise_L" + std::to_string(l) + "_flatness=" + fixed(f, 4));
    previous = f;
  }
  for (int l = 1; l <= kLevelCount; ++l) {
    const auto a = synth_audiocomb(l);
    bool ok;
    if (l == kLevelCount) {
      // The pure carrier, rendered by the unmodulated full-tone path, and a
      // 1 kHz sinusoid at the stimulus RMS.
      ok = a == synth_rough(kLevelCount);
      for (std::size_t i = 0; ok && i < a.samples.size(); ++i)
        ok = std::abs(a.samples[i] - kStimulusRms * std::numbers::sqrt2 *
                                         std::sin(2.0 * std::numbers::pi * kCarrierHz * double(i) / a.sample_rate)) < 1e-12;
    } else {
      const auto s = stimcheck::power_spectrum(a);
      const double fm = modulation_rate_for_level(l);
      ok = l == 1 ? stimcheck::flatness(a) > stimcheck::flatness(synth_audiocomb(2))
                  : stimcheck::sidebands_at(s, fm, &why);
    }
    record(ok, "audiocomb_L" + std::to_string(l));
  }
  o.note("stimuli_passed", std::to_string(passed) + "/40");
  o.check(passed == 40, "all_stimuli");
}

// ---- interpolation --------------------------------------------------------

void interpolation(Outcome& o) {
  const auto& layout = default_layout();
  const std::vector<Vec2> pts(layout.coords2d.begin(), layout.coords2d.end());
  Rng rng(17);
  double electrode_err = 0.0, linear_err = 0.0;
  std::size_t grid_points = 0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> values(pts.size());
    for (auto& v : values) v = 10.0 * rng.normal();
    const CloughTocher ct(pts, values);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto v = ct(pts[i]);
      electrode_err = std::max(electrode_err, v ? std::abs(*v - values[i]) : INFINITY);
    }
    const double a = rng.normal(), bu = rng.normal(), bv = rng.normal();
    std::vector<double> lin;
    for (const auto& p : pts) lin.push_back(a + bu * p.u + bv * p.v);
    const CloughTocher field(pts, lin);
    const double r = head_radius(layout);
    for (std::size_t row = 0; row < 64; ++row)
      for (std::size_t col = 0; col < 64; ++col) {
        const Vec2 p = grid_point(row, col, 64, r);
        if (const auto v = field(p)) {
          linear_err = std::max(linear_err, std::abs(*v - (a + bu * p.u + bv * p.v)));
          ++grid_points;
        }
      }
  }
  o.note("electrode_err", electrode_err);
  o.note("linear_err", linear_err);
  o.note("grid_points", grid_points);
  o.check(electrode_err <= 1e-9, "electrode_values");
  o.check(linear_err <= 1e-6 && grid_points > 0, "linear_field");
}

// ---- autodiff -------------------------------------------------------------

void autodiff(Outcome& o) {
  double worst = 0.0;
  std::size_t cases = 0;
  auto all = gradsuite::primitive_cases();
  for (auto& c : gradsuite::architecture_cases(32)) all.push_back(std::move(c));
  for (const auto& c : all) {
    const auto r = c.run();
    ++cases;
    worst = std::max(worst, r.max_rel_error);
    o.check(r.max_rel_error <= 1e-4 && r.checked > 0, c.name + "=" + fixed(r.max_rel_error, 8));
  }
  o.note("cases", cases);
  o.note("max_rel_error", worst);
}

// ---- planted-signal recovery ------------------------------------------------

void planted(Outcome& o) {
  const auto cfg = config("planted.json");
  const auto epochs = synth_dataset(cfg.synthetic);
  const auto psd = compute_features(epochs, FeatureKind::Psd);
  const auto raw = compute_features(epochs, FeatureKind::Raw);
  const auto topo = compute_features(epochs, FeatureKind::Topo);
  const auto y = cl_targets(psd.labels);
  const auto plan = stratified_cv(y, cfg.eval.k, cfg.eval.repetitions, cfg.seed);
  o.note("runs", plan.run_count());

  const auto svm = evaluate_classical(ClassicalKind::SvmRbf, psd, y, plan, cfg.eval);
  o.note("svm_f1", format_summary(svm.f1, 3));
  o.check(svm.f1.mean >= 0.90, "svm_f1>=0.90");

  const auto shuffled = shuffled_labels(y, mix_seed(cfg.seed, 0x5fu));
  const auto control = evaluate_classical(ClassicalKind::SvmRbf, psd, shuffled,
                                          stratified_cv(shuffled, cfg.eval.k, cfg.eval.repetitions, cfg.seed), cfg.eval);
  o.note("shuffled_f1", format_summary(control.f1, 3));
  o.check(control.f1.mean >= 0.35 && control.f1.mean <= 0.65, "shuffled_in_[0.35,0.65]");

  const auto fusion = evaluate_fusion(raw, topo, y, plan, cfg.eval);
  const double best = std::max(fusion.temporal.f1.mean, fusion.spatial.f1.mean);
  o.note("eegnet_f1", format_summary(fusion.temporal.f1, 3));
  o.note("topo_a_f1", format_summary(fusion.spatial.f1, 3));
  o.note("fusion_f1", format_summary(fusion.fusion.f1, 3));
  o.note("fusion_gain", fixed(fusion.fusion.f1.mean - best));
  o.check(fusion.fusion.f1.mean >= best + 0.02, "fusion>=best_single+0.02");
}

// ---- similarity structure ---------------------------------------------------

void similarity(Outcome& o) {
  const auto cfg = config("similarity.json");
  const auto topo = compute_features(synth_dataset(cfg.synthetic), FeatureKind::Topo);
  const auto report = pairwise_similarity(topo, similarity_config(cfg));
  std::size_t cross = 0, within = 0;
  double cross_max = 0.0, within_min = 1.0;
  for (const auto& r : report.rows) {
    const bool same = r.label_a == r.label_b;
    const std::string pair = std::string(to_string(r.a)) + "-" + std::string(to_string(r.b));
    if (same) {
      ++within;
      within_min = std::min(within_min, r.score.mean);
      o.check(r.score.mean >= 0.4, pair + "=" + fixed(r.score.mean));
    } else {
      ++cross;
      cross_max = std::max(cross_max, r.score.mean);
      o.check(r.score.mean <= 0.1 && !r.similar, pair + "=" + fixed(r.score.mean));
    }
  }
  o.note("runs_per_pair", report.runs_per_pair);
  o.note("high_low_pairs", cross);
  o.note("high_low_max", fixed(cross_max));
  o.note("same_label_min", fixed(within_min));
  o.check(cross == 8 && within == 7, "pair_counts");
}

// ---- harness invariants -----------------------------------------------------

void harness(Outcome& o) {
  // Partition property over a grid of configurations.
  bool partition = true;
  for (std::size_t n : {41u, 60u, 101u})
    for (std::size_t k : {2u, 5u, 10u})
      for (std::size_t reps : {1u, 3u})
        for (std::uint64_t seed : {0u, 7u, 12345u}) {
          std::vector<int> labels(n);
          for (std::size_t i = 0; i < n; ++i) labels[i] = (i * 7 % 5) < 2 ? 1 : 0;
          const auto plan = stratified_cv(labels, k, reps, seed);
          for (const auto& run : plan.runs) {
            std::vector<int> seen(n, 0);
            for (const auto& f : run) {
              for (auto i : f.test) ++seen[i];
              std::set<std::size_t> train(f.train.begin(), f.train.end());
              partition &= train.size() + f.test.size() == n;
              for (auto i : f.test) partition &= !train.count(i);
            }
            partition &= std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
          }
        }
  o.check(partition, "cv_partition");

  // Every fitting stage touches training indices only.
  SyntheticSpec spec;
  spec.n_epochs = 60;
  spec.seed = 3;
  const auto epochs = synth_dataset(spec);
  const auto psd = compute_features(epochs, FeatureKind::Psd);
  const auto raw = compute_features(epochs, FeatureKind::Raw);
  const auto topo = compute_features(epochs, FeatureKind::Topo);
  const auto y = cl_targets(psd.labels);
  const auto plan = stratified_cv(y, 3, 1, 5);
  EvalConfig cfg;
  cfg.repetitions = 1;
  cfg.train.max_epochs = 1;
  cfg.train.batch_size = 16;
  AccessLog log;
  evaluate_classical(ClassicalKind::SvmRbf, psd, y, plan, cfg, &log);
  evaluate_neural(nn::Architecture::TopoA, topo, y, plan, cfg, &log);
  evaluate_fusion(raw, topo, y, plan, cfg, &log);
  std::set<std::string> stages;
  bool clean = true;
  for (const auto& e : log.entries) {
    stages.insert(e.stage);
    const auto& fold = plan.runs[e.repetition][e.fold];
    const std::set<std::size_t> test(fold.test.begin(), fold.test.end());
    clean &= e.indices.size() == fold.train.size();
    for (auto i : e.indices) clean &= !test.count(i);
  }
  o.note("leakage_stages", stages.size());
  o.check(clean && stages.size() >= 8, "no_leakage");

  // Poisoning one test row moves at most that row's prediction.
  auto poisoned = psd;
  const std::size_t victim = plan.runs[0][0].test[0];
  for (std::size_t c = 0; c < poisoned.rows.cols(); ++c) poisoned.rows(victim, c) *= 1e6;
  const auto a = evaluate_classical(ClassicalKind::GNB, psd, y, plan, cfg).per_run[0].confusion;
  const auto b = evaluate_classical(ClassicalKind::GNB, poisoned, y, plan, cfg).per_run[0].confusion;
  const auto diff = [](std::size_t p, std::size_t q) { return p > q ? p - q : q - p; };
  o.check(diff(a.tp, b.tp) + diff(a.fp, b.fp) + diff(a.tn, b.tn) + diff(a.fn, b.fn) <= 2, "poison_probe");

  // Determinism: identical seeded runs give byte-identical reports.
  const auto reports = [&] {
    std::string out;
    out += dump_report(envelope("metrics", to_json(evaluate_classical(ClassicalKind::SvmRbf, psd, y, plan, cfg))));
    out += dump_report(envelope("metrics", to_json(evaluate_neural(nn::Architecture::EEGNet, raw, y, plan, cfg))));
    out += dump_report(envelope("fusion", to_json(evaluate_fusion(raw, topo, y, plan, cfg))));
    SyntheticSpec six = spec;
    six.six_parameters = true;
    SimilarityConfig sc;
    sc.k = 2;
    sc.repetitions = 1;
    sc.train.max_epochs = 1;
    out += dump_report(
        envelope("similarity", to_json(pairwise_similarity(compute_features(synth_dataset(six), FeatureKind::Topo), sc))));
    return out;
  };
  const auto first = reports();
  o.check(first == reports(), "byte_identical_reports");
  o.note("report_bytes", first.size());
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"dsp", 10, dsp},
      {"stimulus", 30, stimuli},
      {"interpolation", 5, interpolation},
      {"autodiff", 300, autodiff},
      {"planted-recovery", 1800, planted},
      {"similarity", 2700, similarity},
      {"harness", 600, harness},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(elapsed < c.limit_s, "runtime");
    std::printf("%s %-17s runtime=%.1fs/<%.0fs%s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), elapsed, c.limit_s,
                o.detail.str().c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
