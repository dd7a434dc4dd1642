#include "sonilab/eval/evaluate.hpp"

#include <algorithm>

#include "sonilab/error.hpp"
#include "sonilab/features.hpp"
#include "sonilab/rng.hpp"

namespace sonilab::eval {
namespace {

bool both_classes(std::span<const int> y) {
  bool has0 = false, has1 = false;
  for (int v : y) (v == 1 ? has1 : has0) = true;
  return has0 && has1;
}

void check_inputs(const FeatureBank& bank, std::span<const int> labels, const FoldPlan& plan) {
  if (bank.count() != labels.size())
    throw_usage("shape_mismatch", "feature rows (" + std::to_string(bank.count()) + ") and labels (" +
                                      std::to_string(labels.size()) + ") differ");
  for (const auto& rep : plan.runs)
    for (const auto& f : rep)
      for (const auto* part : {&f.train, &f.test})
        for (auto i : *part)
          if (i >= labels.size()) throw_usage("index_range", "fold plan references a sample beyond the dataset");
}

// z-scored train/test matrices for one fold.
std::pair<Matrix, Matrix> standardize(const Matrix& rows, const Fold& fold) {
  const auto train = take_rows(rows, fold.train);
  const auto norm = zscore_fit(train);
  return {zscore_apply(norm, train), zscore_apply(norm, take_rows(rows, fold.test))};
}

template <typename RunFn>
MetricsReport run_plan(const std::string& name, std::span<const int> labels, const FoldPlan& plan, RunFn&& fn) {
  std::vector<RunMetrics> runs;
  std::size_t skipped = 0;
  for (std::size_t rep = 0; rep < plan.runs.size(); ++rep)
    for (std::size_t f = 0; f < plan.runs[rep].size(); ++f) {
      const auto& fold = plan.runs[rep][f];
      const auto ytr = take(labels, fold.train), yte = take(labels, fold.test);
      if (!both_classes(ytr) || !both_classes(yte)) {
        ++skipped;
        continue;
      }
      auto m = score_run(yte, fn(rep, f, fold, ytr));
      m.repetition = rep, m.fold = f;
      runs.push_back(m);
    }
  return aggregate(name, std::move(runs), skipped);
}

nn::TrainConfig run_config(const EvalConfig& config, std::size_t rep, std::size_t fold, std::uint64_t stream) {
  auto c = config.train;
  c.seed = mix_seed(run_seed(config.seed, rep, fold), stream);
  return c;
}

}  // namespace

void AccessLog::record(std::size_t repetition, std::size_t fold, std::string stage,
                       std::span<const std::size_t> indices) {
  entries.push_back({repetition, fold, std::move(stage), {indices.begin(), indices.end()}});
}

std::vector<int> shuffled_labels(std::span<const int> labels, std::uint64_t seed) {
  std::vector<int> out(labels.begin(), labels.end());
  Rng rng(seed);
  rng.shuffle(out);
  return out;
}

FeatureKind input_kind(nn::Architecture arch) {
  using nn::Architecture;
  switch (arch) {
    case Architecture::CNN1D:
    case Architecture::EEGNet: return FeatureKind::Raw;
    case Architecture::SpectA:
    case Architecture::SpectB:
    case Architecture::SpectC:
    case Architecture::SpectD: return FeatureKind::Spect;
    default: return FeatureKind::Topo;
  }
}

MetricsReport evaluate_classical(ClassicalKind kind, const FeatureBank& bank, std::span<const int> labels,
                                 const FoldPlan& plan, const EvalConfig& config, AccessLog* log) {
  check_inputs(bank, labels, plan);
  const auto name = to_string(kind) + "/" + to_string(bank.kind);
  return run_plan(name, labels, plan, [&](std::size_t rep, std::size_t f, const Fold& fold, const std::vector<int>& ytr) {
    if (log) log->record(rep, f, "normalizer:" + to_string(bank.kind), fold.train);
    const auto [xtr, xte] = standardize(bank.rows, fold);
    if (log) log->record(rep, f, "model:" + to_string(kind), fold.train);
    ClassicalModel model;
    switch (kind) {
      case ClassicalKind::GNB: model = fit_gnb(xtr, ytr); break;
      case ClassicalKind::LDA: model = fit_lda(xtr, ytr); break;
      default: model = fit_svm(xtr, ytr, kind, config.svm); break;
    }
    return predict_all(model, xte);
  });
}

MetricsReport evaluate_neural(nn::Architecture arch, const FeatureBank& bank, std::span<const int> labels,
                              const FoldPlan& plan, const EvalConfig& config, AccessLog* log) {
  check_inputs(bank, labels, plan);
  if (arch == nn::Architecture::FusionMLP || arch == nn::Architecture::Siamese)
    throw_usage("bad_architecture", to_string(arch) + " is not a single-representation classifier");
  const auto name = to_string(arch) + "/" + to_string(bank.kind);
  return run_plan(name, labels, plan, [&](std::size_t rep, std::size_t f, const Fold& fold, const std::vector<int>& ytr) {
    if (log) log->record(rep, f, "normalizer:" + to_string(bank.kind), fold.train);
    const auto [xtr, xte] = standardize(bank.rows, fold);
    const auto cfg = run_config(config, rep, f, 0);
    nn::Network net(nn::build_model(arch, cfg.seed));
    if (net.spec().input_shape != bank.sample_shape)
      throw_usage("shape_mismatch", to_string(arch) + " needs " + nn::shape_string(net.spec().input_shape) +
                                        " samples, got " + nn::shape_string(bank.sample_shape));
    if (log) log->record(rep, f, "model:" + to_string(arch), fold.train);
    nn::train_classifier(net, nn::make_dataset(xtr, bank.sample_shape, ytr), cfg);
    return nn::predict(net, nn::make_dataset(xte, bank.sample_shape, std::vector<int>(xte.rows(), 0)));
  });
}

FusionReport evaluate_fusion(const FeatureBank& raw, const FeatureBank& topo, std::span<const int> labels,
                             const FoldPlan& plan, const EvalConfig& config, AccessLog* log) {
  check_inputs(raw, labels, plan);
  check_inputs(topo, labels, plan);
  std::vector<RunMetrics> temporal, spatial, fused;
  std::size_t skipped = 0;
  for (std::size_t rep = 0; rep < plan.runs.size(); ++rep)
    for (std::size_t f = 0; f < plan.runs[rep].size(); ++f) {
      const auto& fold = plan.runs[rep][f];
      const auto ytr = take(labels, fold.train), yte = take(labels, fold.test);
      if (!both_classes(ytr) || !both_classes(yte)) {
        ++skipped;
        continue;
      }
      const std::vector<int> unknown(yte.size(), 0);
      if (log) log->record(rep, f, "normalizer:raw", fold.train);
      const auto [rtr, rte] = standardize(raw.rows, fold);
      if (log) log->record(rep, f, "normalizer:topo", fold.train);
      const auto [ttr, tte] = standardize(topo.rows, fold);
      const auto raw_train = nn::make_dataset(rtr, raw.sample_shape, ytr);
      const auto raw_test = nn::make_dataset(rte, raw.sample_shape, unknown);
      const auto topo_train = nn::make_dataset(ttr, topo.sample_shape, ytr);
      const auto topo_test = nn::make_dataset(tte, topo.sample_shape, unknown);

      const auto c_temporal = run_config(config, rep, f, 1);
      const auto c_spatial = run_config(config, rep, f, 2);
      const auto c_fusion = run_config(config, rep, f, 3);
      nn::Network eegnet(nn::build_eegnet(c_temporal.seed));
      nn::Network topo_a(nn::build_topo_cnn('A', c_spatial.seed));
      if (log) log->record(rep, f, "model:EEGNet", fold.train);
      nn::train_classifier(eegnet, raw_train, c_temporal);
      if (log) log->record(rep, f, "model:Topo-A", fold.train);
      nn::train_classifier(topo_a, topo_train, c_spatial);

      auto mt = score_run(yte, nn::predict(eegnet, raw_test));
      auto ms = score_run(yte, nn::predict(topo_a, topo_test));

      eegnet.set_frozen(true);
      topo_a.set_frozen(true);
      const auto concat_rows = [](const Matrix& a, const Matrix& b) {
        Matrix out(a.rows(), a.cols() + b.cols());
        for (std::size_t r = 0; r < a.rows(); ++r) {
          std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
          std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(a.cols()));
        }
        return out;
      };
      const auto etr = concat_rows(nn::extract_embeddings(eegnet, raw_train), nn::extract_embeddings(topo_a, topo_train));
      const auto ete = concat_rows(nn::extract_embeddings(eegnet, raw_test), nn::extract_embeddings(topo_a, topo_test));
      if (log) log->record(rep, f, "normalizer:embedding", fold.train);
      const auto enorm = zscore_fit(etr);
      nn::Network mlp(nn::build_fusion_mlp(nn::kEmbeddingSize, nn::kEmbeddingSize, c_fusion.seed));
      if (log) log->record(rep, f, "model:FusionMLP", fold.train);
      nn::train_classifier(mlp, nn::make_dataset(zscore_apply(enorm, etr), {2 * nn::kEmbeddingSize}, ytr), c_fusion);
      auto mf = score_run(yte, nn::predict(mlp, nn::make_dataset(zscore_apply(enorm, ete), {2 * nn::kEmbeddingSize}, unknown)));

      for (auto* m : {&mt, &ms, &mf}) m->repetition = rep, m->fold = f;
      temporal.push_back(mt);
      spatial.push_back(ms);
      fused.push_back(mf);
    }
  return {aggregate("EEGNet/raw", std::move(temporal), skipped),
          aggregate("Topo-A/topo", std::move(spatial), skipped),
          aggregate("Fusion/raw+topo", std::move(fused), skipped)};
}

}  // namespace sonilab::eval
