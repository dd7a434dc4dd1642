#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sonilab/eval/dataset.hpp"
#include "sonilab/eval/metrics.hpp"
#include "sonilab/nn/train.hpp"

namespace sonilab::eval {

inline constexpr double kSimilarThreshold = 0.25;

/// How one run's test fold is reduced to a single pair score.
/// Prototype: score between the two parameters' mean test embeddings.
/// PairMean: mean score over every cross-parameter test epoch pair.
enum class SimilarityAggregation { Prototype, PairMean };

std::string to_string(SimilarityAggregation a);
SimilarityAggregation parse_similarity_aggregation(const std::string& text);

struct SimilarityConfig {
  std::size_t k = 5;
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  nn::TrainConfig train;  // margin lives here; seed replaced per run
  double threshold = kSimilarThreshold;
  /// Restrict training and scoring pairs to epochs of the same participant.
  bool within_participant = false;
  SimilarityAggregation aggregation = SimilarityAggregation::Prototype;
  /// Parameter-level CL; defaults to the audio/visual split.
  std::map<Parameter, CognitiveLoad> clusters;
};

struct SimilarityRow {
  Parameter a = Parameter::Noise, b = Parameter::Noise;
  CognitiveLoad label_a = CognitiveLoad::Low, label_b = CognitiveLoad::Low;
  Summary score;                    // over runs
  bool similar = false;             // score.mean > threshold
  std::vector<double> run_scores;   // mean test-pair score per run
};

struct SimilarityReport {
  double threshold = kSimilarThreshold;
  std::size_t runs_per_pair = 0;
  SimilarityAggregation aggregation = SimilarityAggregation::Prototype;
  std::vector<SimilarityRow> rows;  // C(6,2) = 15, canonical parameter order
};

/// For each parameter pair: repeated stratified k-fold over the pair's
/// epochs; a Siamese tower is trained on within-batch pairs of the training
/// fold (positive iff same CL) and scored on the test fold per
/// `aggregation`. With `within_participant`, scoring only compares epochs
/// (or prototypes) of the same participant. Throws Error{Data, "too_few_samples"} when a parameter has
/// fewer than k epochs.
SimilarityReport pairwise_similarity(const FeatureBank& topo, const SimilarityConfig& config);

}  // namespace sonilab::eval
