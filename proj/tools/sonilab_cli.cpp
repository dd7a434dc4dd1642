// Command-line front door: every subcommand maps (config, inputs) to output
// files. Failures print one JSON line on stderr and exit 1 (usage),
// 2 (data) or 3 (numeric).
#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "sonilab/classical.hpp"
#include "sonilab/config.hpp"
#include "sonilab/container.hpp"
#include "sonilab/error.hpp"
#include "sonilab/eval/cv.hpp"
#include "sonilab/features.hpp"
#include "sonilab/rng.hpp"
#include "sonilab/eval/mapping.hpp"
#include "sonilab/eval/report.hpp"
#include "sonilab/media_io.hpp"
#include "sonilab/nn/checkpoint.hpp"
#include "sonilab/nn/train.hpp"
#include "sonilab/recording_io.hpp"
#include "sonilab/stimulus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sonilab;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void write_text(const std::string& text, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("write_failed", "cannot write " + path.string());
  out << text;
  if (!out) throw_data("write_failed", "cannot write " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw_data("missing_input", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw_data("bad_json", path.string() + ": " + e.what());
  }
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw_data("missing_input", "no such file: " + path.string());
}

/// Report JSON to `out` (or stdout); the aligned table goes to stdout when
/// the JSON went to a file.
void emit(const json& report, const std::string& table, const std::string& out) {
  if (out.empty()) {
    std::cout << eval::dump_report(report);
    return;
  }
  write_text(eval::dump_report(report), out);
  std::cout << table;
}

struct Common {
  std::string config;
  AppConfig load() const { return config.empty() ? config_from_json(json::object()) : load_config(config); }
};

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string param = "all";
  std::string out;
};

void run_synth(const Common& common, const SynthArgs& a) {
  const AppConfig cfg = common.load();
  std::vector<Parameter> params;
  if (lower(a.param) == "all") params.assign(kAllParameters.begin(), kAllParameters.end());
  else params.push_back(parse_parameter_or_code(a.param));
  fs::create_directories(a.out);
  const Matrix reference = reference_image(cfg.service.image_size, cfg.seed);
  std::size_t files = 0;
  for (auto p : params) {
    const std::string stem = lower(to_string(p));
    for (int level = 1; level <= kLevelCount; ++level) {
      const std::string base = stem + "_L" + std::to_string(level);
      if (is_audio(p)) {
        write_wav(synth_audio(p, level, cfg.service.audio_rate), fs::path(a.out) / (base + ".wav"));
        ++files;
      }
      if (has_image(p)) {
        write_pgm(blur_image(reference, level), fs::path(a.out) / (base + ".pgm"));
        ++files;
      }
    }
  }
  std::cout << json{{"written", files}, {"out", a.out}}.dump() << "\n";
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string out;
  std::optional<double> effect;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  bool six = false;
};

eval::SyntheticSpec synthetic_spec(const AppConfig& cfg, const SimulateArgs& a) {
  eval::SyntheticSpec s = cfg.synthetic;
  if (a.effect) s.effect = *a.effect;
  if (a.seed) s.seed = *a.seed;
  if (a.n) s.n_epochs = *a.n;
  if (a.six) s.six_parameters = true;
  eval::validate(s);
  return s;
}

void run_simulate(const Common& common, const SimulateArgs& a) {
  const auto spec = synthetic_spec(common.load(), a);
  const auto epochs = eval::synth_dataset(spec);
  write_epochs(epochs, a.out);
  std::cout << json{{"epochs", epochs.size()}, {"out", a.out}}.dump() << "\n";
}

// ---- preprocess -----------------------------------------------------------

struct PreprocessArgs {
  std::string recording;
  std::string markers;
  std::string bundle;
  std::string out;
  std::string report;
};

/// Labels epochs from an exported session bundle (sub-session order + TLX).
void label_from_bundle(std::vector<Epoch>& epochs, const json& bundle, double threshold) {
  try {
    const std::string participant = bundle.at("participant").get<std::string>();
    const SessionKind kind = parse_session_kind(bundle.at("session").get<std::string>());
    eval::SubSessionOrder order{};
    const auto& names = bundle.at("sub_session_order");
    if (!names.is_array() || names.size() != order.size()) throw_data("bad_bundle", "sub_session_order needs 6 entries");
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = parse_parameter(names[i].get<std::string>());
    std::vector<TlxRating> ratings;
    for (const auto& t : bundle.at("tlx")) {
      TlxRating r;
      r.participant = participant;
      r.session = kind;
      r.sub_session = t.at("sub_session").get<int>();
      r.effort = t.at("effort").get<int>();
      r.mental_demand = t.at("mental_demand").get<int>();
      r.frustration = t.at("frustration").get<int>();
      validate_tlx(r);
      ratings.push_back(r);
    }
    eval::apply_tlx_labels(epochs, ratings, {{{participant, kind}, order}}, threshold);
  } catch (const json::exception& e) {
    throw_data("bad_bundle", e.what());
  }
}

void run_preprocess(const Common& common, const PreprocessArgs& a) {
  const AppConfig cfg = common.load();
  require_file(a.recording);
  json bundle;
  fs::path markers = a.markers.empty() ? markers_path_for(a.recording) : fs::path(a.markers);
  if (!a.bundle.empty()) {
    bundle = read_json(a.bundle);
    if (a.markers.empty()) {
      // The bundle carries its own markers; stage them next to the output.
      markers = fs::path(a.out).replace_extension(".markers.csv");
      write_text(bundle.at("markers_csv").get<std::string>(), markers);
    }
  }
  require_file(markers);
  const RawRecording rec = read_recording(a.recording, markers);
  auto result = preprocess_recording(rec, cfg.preprocess);
  if (!bundle.is_null()) label_from_bundle(result.kept, bundle, cfg.tlx_threshold);
  write_epochs(result.kept, a.out);
  const json report = rejection_report(result);
  if (!a.report.empty()) write_text(report.dump(2) + "\n", a.report);
  std::cout << json{{"kept", result.kept.size()}, {"rejected", result.rejected.size()}, {"out", a.out}}.dump() << "\n";
}

// ---- features -------------------------------------------------------------

struct FeaturesArgs {
  std::string in;
  std::string feature;
  std::string out;
};

void run_features(const Common& common, const FeaturesArgs& a) {
  const AppConfig cfg = common.load();
  require_file(a.in);
  const auto kind = a.feature.empty() ? cfg.feature : eval::parse_feature_kind(a.feature);
  if (kind == eval::FeatureKind::Raw) throw_usage("bad_feature", "raw epochs are already stored in the epoch container");
  const auto bank = eval::compute_features(read_epochs(a.in), kind);
  write_features(eval::to_table(bank), a.out);
  std::cout << json{{"samples", bank.count()}, {"feature", eval::to_string(kind)}, {"out", a.out}}.dump() << "\n";
}

// ---- shared dataset loading for train/eval/similarity ---------------------

struct DataArgs {
  std::string epochs;    // epoch container
  std::string features;  // feature container
};

std::vector<Epoch> load_or_simulate(const AppConfig& cfg, const DataArgs& d, bool six) {
  if (!d.epochs.empty()) {
    require_file(d.epochs);
    return read_epochs(d.epochs);
  }
  SimulateArgs s;
  s.six = six;
  return eval::synth_dataset(synthetic_spec(cfg, s));
}

eval::FeatureBank load_bank(const AppConfig& cfg, const DataArgs& d, eval::FeatureKind kind, bool six = false) {
  if (!d.features.empty()) {
    require_file(d.features);
    auto bank = eval::from_table(read_features(d.features));
    if (bank.kind != kind)
      throw_data("schema_mismatch", "feature file holds " + eval::to_string(bank.kind) + ", need " + eval::to_string(kind));
    return bank;
  }
  return eval::compute_features(load_or_simulate(cfg, d, six), kind);
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  DataArgs data;
  std::string arch;
  std::string out;
  std::string embeddings;
};

void run_train(const Common& common, const TrainArgs& a) {
  const AppConfig cfg = common.load();
  const auto arch = a.arch.empty() ? cfg.arch : nn::parse_architecture(a.arch);
  if (arch == nn::Architecture::FusionMLP || arch == nn::Architecture::Siamese)
    throw_usage("bad_arch", "train fits single-input classifiers; use eval/similarity for " + std::string(nn::to_string(arch)));
  const auto bank = load_bank(cfg, a.data, eval::input_kind(arch));
  const auto y = eval::cl_targets(bank.labels);
  const auto norm = zscore_fit(bank.rows);
  const auto data = nn::make_dataset(zscore_apply(norm, bank.rows), bank.sample_shape, y);
  nn::Network net(nn::build_model(arch, cfg.seed));
  auto train = cfg.eval.train;
  train.seed = cfg.seed;
  const auto report = nn::train_classifier(net, data, train);
  save_checkpoint(net, a.out,
                  {{"feature", eval::to_string(bank.kind)},
                   {"normalizer", {{"mean", norm.mean}, {"scale", norm.scale}}},
                   {"epochs_run", report.epochs_run},
                   {"best_epoch", report.best_epoch}});
  if (!a.embeddings.empty()) write_text(nn::format_embeddings_csv(nn::extract_embeddings(net, data), bank.labels), a.embeddings);
  std::cout << json{{"arch", std::string(nn::to_string(arch))},
                    {"samples", data.size()},
                    {"epochs_run", report.epochs_run},
                    {"out", a.out}}
                   .dump()
            << "\n";
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  DataArgs data;
  std::string feature;
  std::string arch;
  std::string classifier;
  std::string logs;
  bool shuffle = false;
  bool extremum = false;
  std::string out;
};

void run_mapping(const EvalArgs& a) {
  const json bundle = read_json(a.logs);
  std::vector<TrialLog> logs;
  std::optional<SessionKind> kind;
  try {
    for (const auto& t : bundle.at("trials")) {
      TrialLog l;
      l.participant = t.at("participant").get<std::string>();
      l.session = parse_session_kind(t.at("session").get<std::string>());
      l.sub_session = t.at("sub_session").get<int>();
      l.parameter = parse_parameter(t.at("parameter").get<std::string>());
      l.focus_level = t.at("focus_level").get<int>();
      if (!t.at("target_level").is_null()) l.target_level = t.at("target_level").get<int>();
      if (!t.at("response").is_null()) l.response = t.at("response").get<int>();
      if (!t.at("latency_ms").is_null()) l.latency_ms = t.at("latency_ms").get<double>();
      l.onset_ms = t.at("onset_ms").get<double>();
      if (kind && *kind != l.session) throw_data("mixed_sessions", "logs mix IR and CR trials");
      kind = l.session;
      logs.push_back(l);
    }
  } catch (const json::exception& e) {
    throw_data("bad_bundle", e.what());
  }
  if (!kind) throw_data("empty_logs", "bundle has no trials");
  const auto tables = eval::mapping_accuracy(logs, *kind);
  emit(eval::envelope("mapping", eval::to_json(tables)),
       eval::format_mapping_table(tables) + "\n" + eval::format_level_table(tables), a.out);
}

void run_eval(const Common& common, const EvalArgs& a) {
  if (!a.logs.empty()) return run_mapping(a);
  const AppConfig cfg = common.load();
  auto kind = a.feature.empty() ? cfg.feature : eval::parse_feature_kind(a.feature);
  const bool fusion = !a.arch.empty() && nn::parse_architecture(a.arch) == nn::Architecture::FusionMLP;

  std::vector<eval::FeatureBank> banks;
  std::optional<nn::Architecture> arch;
  std::optional<ClassicalKind> classical;
  if (fusion) {
    if (!a.data.features.empty()) throw_usage("bad_input", "fusion needs an epoch container (raw + topo)");
    const auto epochs = load_or_simulate(cfg, a.data, false);
    banks.push_back(eval::compute_features(epochs, eval::FeatureKind::Raw));
    banks.push_back(eval::compute_features(epochs, eval::FeatureKind::Topo));
  } else {
    if (!a.classifier.empty()) classical = parse_classical_kind(a.classifier);
    else arch = a.arch.empty() ? cfg.arch : nn::parse_architecture(a.arch);
    if (arch) {
      const auto need = eval::input_kind(*arch);
      if (!a.feature.empty() && need != kind)
        throw_usage("bad_feature", std::string(nn::to_string(*arch)) + " consumes " + eval::to_string(need) + " input");
      kind = need;
    }
    banks.push_back(load_bank(cfg, a.data, kind));
  }

  std::vector<int> y;
  if (a.extremum) {
    const auto subset = eval::extremum_labels(banks[0].labels, cfg.extremum_levels);
    for (auto& b : banks) {
      b.rows = eval::take_rows(b.rows, subset.indices);
      std::vector<EpochLabels> labels;
      for (auto i : subset.indices) labels.push_back(b.labels[i]);
      b.labels = std::move(labels);
    }
    y = subset.labels;
  } else {
    y = eval::cl_targets(banks[0].labels);
  }
  if (a.shuffle) y = eval::shuffled_labels(y, mix_seed(cfg.seed, 0x5fu));

  const auto plan = eval::stratified_cv(y, cfg.eval.k, cfg.eval.repetitions, cfg.seed);
  json payload;
  std::vector<eval::MetricsReport> reports;
  if (fusion) {
    const auto fr = eval::evaluate_fusion(banks[0], banks[1], y, plan, cfg.eval);
    reports = {fr.temporal, fr.spatial, fr.fusion};
    payload = eval::to_json(fr);
  } else {
    reports.push_back(classical ? eval::evaluate_classical(*classical, banks[0], y, plan, cfg.eval)
                                : eval::evaluate_neural(*arch, banks[0], y, plan, cfg.eval));
    payload = eval::to_json(reports.back());
  }
  payload["labels"] = a.extremum ? "extremum" : "cl";
  payload["shuffled"] = a.shuffle;
  emit(eval::envelope(fusion ? "fusion" : "metrics", payload), eval::format_metrics_table(reports), a.out);
}

// ---- similarity -----------------------------------------------------------

struct SimilarityArgs {
  DataArgs data;
  std::string out;
};

void run_similarity(const Common& common, const SimilarityArgs& a) {
  const AppConfig cfg = common.load();
  const auto bank = load_bank(cfg, a.data, eval::FeatureKind::Topo, true);
  const auto report = eval::pairwise_similarity(bank, similarity_config(cfg));
  emit(eval::envelope("similarity", eval::to_json(report)), eval::format_similarity_table(report), a.out);
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
  std::optional<int> port;
  std::string host;
};

void run_serve(const Common& common, const ServeArgs& a) {
  AppConfig cfg = common.load();
  if (a.port) cfg.service.port = *a.port;
  if (!a.host.empty()) cfg.service.host = a.host;
  service::Service svc(cfg.service);
  std::cerr << json{{"listening", cfg.service.host + ":" + std::to_string(cfg.service.port)}}.dump() << "\n";
  service::serve(svc, cfg.service);
}

void fail(int code, const std::string& id, const std::string& message) {
  std::cerr << json{{"error", id}, {"exit_code", code}, {"message", message}}.dump() << "\n";
}

void add_data_options(CLI::App* cmd, DataArgs& d) {
  auto* e = cmd->add_option("--epochs", d.epochs, "Epoch container (default: planted synthetic data from the config)");
  auto* f = cmd->add_option("--features", d.features, "Feature container");
  e->excludes(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sonilab: stimulus synthesis, EEG preprocessing, cognitive-load models and session service"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "JSON config file")->check(CLI::ExistingFile);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Render stimulus files <param>_L<level>.wav/.pgm");
  c_synth->add_option("--param", synth.param, "Parameter name, coded name (type1..type6) or 'all'");
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Write a planted synthetic epoch dataset");
  c_sim->add_option("--out", sim.out, "Epoch container to write")->required();
  c_sim->add_option("--effect", sim.effect, "Planted High-load effect size");
  c_sim->add_option("--seed", sim.seed, "Dataset seed (default: config seed)");
  c_sim->add_option("--epochs-count", sim.n, "Number of epochs");
  c_sim->add_flag("--six-parameters", sim.six, "Per-parameter load clusters for the similarity study");

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Segment, filter and reject epochs from a recording");
  c_pre->add_option("--recording", pre.recording, "Recording CSV")->required();
  c_pre->add_option("--markers", pre.markers, "Markers CSV (default <stem>.markers.csv)");
  c_pre->add_option("--bundle", pre.bundle, "Session export bundle; supplies markers and TLX labels");
  c_pre->add_option("--out", pre.out, "Epoch container to write")->required();
  c_pre->add_option("--report", pre.report, "Rejection report JSON");

  FeaturesArgs feat;
  auto* c_feat = app.add_subcommand("features", "Compute psd/topo/spect features from epochs");
  c_feat->add_option("--in", feat.in, "Epoch container")->required();
  c_feat->add_option("--feature", feat.feature, "psd | topo | spect");
  c_feat->add_option("--out", feat.out, "Feature container to write")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit a neural classifier and save a checkpoint");
  add_data_options(c_train, train.data);
  c_train->add_option("--arch", train.arch, "Architecture (CNN1D, EEGNet, Topo-A..D, Spect-A..D)");
  c_train->add_option("--out", train.out, "Checkpoint to write")->required();
  c_train->add_option("--embeddings", train.embeddings, "Also export 256-d embeddings as CSV");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Cross-validated metrics report (or mapping accuracy with --logs)");
  add_data_options(c_eval, ev.data);
  c_eval->add_option("--feature", ev.feature, "psd | topo | spect | raw");
  auto* o_arch = c_eval->add_option("--arch", ev.arch, "Neural architecture, or 'fusion'");
  c_eval->add_option("--classifier", ev.classifier, "gnb | lda | svm-linear | svm-rbf")->excludes(o_arch);
  c_eval->add_option("--logs", ev.logs, "Session export bundle: report mapping accuracy");
  c_eval->add_flag("--shuffle-labels", ev.shuffle, "Permute labels (chance-level control)");
  c_eval->add_flag("--extremum", ev.extremum, "Extremum vs intermediate focus levels instead of CL");
  c_eval->add_option("--out", ev.out, "Report JSON (default stdout)");

  SimilarityArgs simil;
  auto* c_simil = app.add_subcommand("similarity", "Siamese pairwise parameter similarity report");
  add_data_options(c_simil, simil.data);
  c_simil->add_option("--out", simil.out, "Report JSON (default stdout)");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP session service");
  c_serve->add_option("--port", serve.port, "Port (default from config)");
  c_serve->add_option("--host", serve.host, "Bind address (default from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail(1, "bad_arguments", e.what());
    return 1;
  }

  try {
    if (*c_synth) run_synth(common, synth);
    else if (*c_sim) run_simulate(common, sim);
    else if (*c_pre) run_preprocess(common, pre);
    else if (*c_feat) run_features(common, feat);
    else if (*c_train) run_train(common, train);
    else if (*c_eval) run_eval(common, ev);
    else if (*c_simil) run_similarity(common, simil);
    else if (*c_serve) run_serve(common, serve);
  } catch (const Error& e) {
    fail(e.exit_code(), e.code(), e.what());
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    fail(1, "invalid_argument", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail(2, "failure", e.what());
    return 2;
  }
  return 0;
}
