#pragma once

#include <filesystem>
#include <json.hpp>
#include <set>
#include <string>

#include "sonilab/eval/dataset.hpp"
#include "sonilab/eval/evaluate.hpp"
#include "sonilab/eval/labels.hpp"
#include "sonilab/eval/similarity.hpp"
#include "sonilab/eval/synthetic.hpp"
#include "sonilab/nn/architectures.hpp"
#include "sonilab/preprocess.hpp"
#include "sonilab/service/server.hpp"

namespace sonilab {

/// Siamese tower defaults: smaller steps than the classifiers (the
/// contrastive loss diverges at 1e-3) and a margin wide enough that
/// negative pairs land well below the dissimilarity bound.
nn::TrainConfig default_siamese_train();

/// Everything a CLI run can be parameterized with. Unknown keys anywhere in
/// the file are rejected so a typo never silently falls back to a default.
struct AppConfig {
  std::uint64_t seed = 42;
  PreprocessOptions preprocess;
  eval::FeatureKind feature = eval::FeatureKind::Psd;
  nn::Architecture arch = nn::Architecture::EEGNet;
  eval::EvalConfig eval;  // cv + train + svm; eval.seed follows `seed`
  double tlx_threshold = eval::kTlxThreshold;
  std::set<int> extremum_levels = eval::kExtremumLevels;
  double similarity_threshold = eval::kSimilarThreshold;
  bool within_participant = false;
  eval::SimilarityAggregation similarity_aggregation = eval::SimilarityAggregation::Prototype;
  nn::TrainConfig siamese = default_siamese_train();
  eval::SyntheticSpec synthetic;
  service::ServiceConfig service;
};

/// Throws Error{Usage, "bad_config"} naming the offending key.
AppConfig config_from_json(const nlohmann::json& j);
AppConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const AppConfig& config);

eval::SimilarityConfig similarity_config(const AppConfig& config);

}  // namespace sonilab
