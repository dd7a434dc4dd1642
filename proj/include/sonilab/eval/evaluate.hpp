#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sonilab/classical.hpp"
#include "sonilab/eval/cv.hpp"
#include "sonilab/eval/dataset.hpp"
#include "sonilab/eval/metrics.hpp"
#include "sonilab/nn/architectures.hpp"
#include "sonilab/nn/train.hpp"

namespace sonilab::eval {

/// Records which sample indices each fitting stage touched, so tests can
/// assert that normalizers and models never see test-fold rows.
struct AccessLog {
  struct Entry {
    std::size_t repetition = 0, fold = 0;
    std::string stage;  // e.g. "normalizer:psd", "model:svm-rbf"
    std::vector<std::size_t> indices;
  };
  std::vector<Entry> entries;

  void record(std::size_t repetition, std::size_t fold, std::string stage, std::span<const std::size_t> indices);
};

struct EvalConfig {
  std::size_t k = 5;
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  nn::TrainConfig train;  // seed replaced per run
  SvmOptions svm;
};

/// Label permutation for chance-level controls.
std::vector<int> shuffled_labels(std::span<const int> labels, std::uint64_t seed);

/// Per run: z-score fitted on the training fold, model fitted on the
/// training fold, macro metrics on the test fold. Runs whose training or
/// test fold lacks a class are skipped and counted.
MetricsReport evaluate_classical(ClassicalKind kind, const FeatureBank& bank, std::span<const int> labels,
                                 const FoldPlan& plan, const EvalConfig& config, AccessLog* log = nullptr);

MetricsReport evaluate_neural(nn::Architecture arch, const FeatureBank& bank, std::span<const int> labels,
                              const FoldPlan& plan, const EvalConfig& config, AccessLog* log = nullptr);

/// Temporal encoder (EEGNet on raw epochs), spatial encoder (Topo-A on topo
/// maps) and the fusion MLP on their frozen 256-d embeddings, all fitted
/// inside the same training fold. The two single-representation reports
/// come from the very encoders the fusion consumes.
struct FusionReport {
  MetricsReport temporal;
  MetricsReport spatial;
  MetricsReport fusion;
};

FusionReport evaluate_fusion(const FeatureBank& raw, const FeatureBank& topo, std::span<const int> labels,
                             const FoldPlan& plan, const EvalConfig& config, AccessLog* log = nullptr);

/// Feature kind each architecture consumes.
FeatureKind input_kind(nn::Architecture arch);

}  // namespace sonilab::eval
