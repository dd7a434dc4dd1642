#include "sonilab/eval/similarity.hpp"

#include <array>

#include "sonilab/error.hpp"
#include "sonilab/eval/cv.hpp"
#include "sonilab/eval/synthetic.hpp"
#include "sonilab/features.hpp"

namespace sonilab::eval {

std::string to_string(SimilarityAggregation a) {
  return a == SimilarityAggregation::Prototype ? "prototype" : "pair-mean";
}

SimilarityAggregation parse_similarity_aggregation(const std::string& text) {
  if (text == "prototype") return SimilarityAggregation::Prototype;
  if (text == "pair-mean") return SimilarityAggregation::PairMean;
  throw_usage("unknown_aggregation", "aggregation must be 'prototype' or 'pair-mean', got '" + text + "'");
}

SimilarityReport pairwise_similarity(const FeatureBank& topo, const SimilarityConfig& config) {
  const auto cluster = [&](Parameter p) {
    const auto it = config.clusters.find(p);
    return it != config.clusters.end() ? it->second : similarity_cluster(p);
  };
  std::map<Parameter, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < topo.labels.size(); ++i) members[topo.labels[i].parameter].push_back(i);
  for (auto p : kAllParameters)
    if (members[p].size() < config.k)
      throw_data("too_few_samples", "parameter " + std::string(to_string(p)) + " has " +
                                        std::to_string(members[p].size()) + " epochs, fewer than k = " +
                                        std::to_string(config.k));

  std::map<std::string, int> participant_ids;
  for (const auto& l : topo.labels) participant_ids.emplace(l.participant, static_cast<int>(participant_ids.size()));

  SimilarityReport report;
  report.threshold = config.threshold;
  report.runs_per_pair = config.k * config.repetitions;
  report.aggregation = config.aggregation;
  std::size_t pair_index = 0;
  for (std::size_t ia = 0; ia < kAllParameters.size(); ++ia)
    for (std::size_t ib = ia + 1; ib < kAllParameters.size(); ++ib, ++pair_index) {
      const auto pa = kAllParameters[ia], pb = kAllParameters[ib];
      SimilarityRow row{pa, pb, cluster(pa), cluster(pb), {}, false, {}};

      std::vector<std::size_t> index = members[pa];
      index.insert(index.end(), members[pb].begin(), members[pb].end());
      std::vector<int> side(members[pa].size(), 0);
      side.resize(index.size(), 1);
      std::vector<int> cl, group;
      for (std::size_t j = 0; j < index.size(); ++j) {
        cl.push_back(cluster(side[j] ? pb : pa) == CognitiveLoad::High ? 1 : 0);
        group.push_back(participant_ids.at(topo.labels[index[j]].participant));
      }
      const Matrix rows = take_rows(topo.rows, index);
      const auto plan = stratified_cv(side, config.k, config.repetitions, mix_seed(config.seed, pair_index));

      for (std::size_t rep = 0; rep < plan.runs.size(); ++rep)
        for (std::size_t f = 0; f < plan.runs[rep].size(); ++f) {
          const auto& fold = plan.runs[rep][f];
          const auto train_rows = take_rows(rows, fold.train);
          const auto norm = zscore_fit(train_rows);
          auto cfg = config.train;
          cfg.seed = mix_seed(run_seed(config.seed, rep, f), 100 + pair_index);
          nn::Network tower(nn::build_siamese(cfg.seed, topo.sample_shape));
          const auto train_groups = take(group, fold.train);
          nn::train_siamese(tower, nn::make_dataset(zscore_apply(norm, train_rows), topo.sample_shape, take(cl, fold.train)),
                            cfg, config.within_participant ? std::span<const int>(train_groups) : std::span<const int>());

          const auto test_rows = zscore_apply(norm, take_rows(rows, fold.test));
          const auto emb = nn::extract_embeddings(
              tower, nn::make_dataset(test_rows, topo.sample_shape, std::vector<int>(test_rows.rows(), 0)));
          double total = 0.0;
          std::size_t count = 0;
          if (config.aggregation == SimilarityAggregation::PairMean) {
            for (std::size_t i = 0; i < fold.test.size(); ++i)
              for (std::size_t j = 0; j < fold.test.size(); ++j) {
                if (side[fold.test[i]] != 0 || side[fold.test[j]] != 1) continue;
                if (config.within_participant && group[fold.test[i]] != group[fold.test[j]]) continue;
                total += nn::similarity_score(emb.row(i), emb.row(j));
                ++count;
              }
          } else {
            // [group][side] -> summed embedding and count; one pool when
            // participants are mixed.
            std::map<int, std::array<std::pair<std::vector<double>, std::size_t>, 2>> pools;
            for (std::size_t i = 0; i < fold.test.size(); ++i) {
              const int g = config.within_participant ? group[fold.test[i]] : 0;
              auto& [sum, n] = pools[g][static_cast<std::size_t>(side[fold.test[i]])];
              sum.resize(emb.cols(), 0.0);
              for (std::size_t c = 0; c < emb.cols(); ++c) sum[c] += emb(i, c);
              ++n;
            }
            for (auto& [g, sides] : pools) {
              if (sides[0].second == 0 || sides[1].second == 0) continue;
              for (auto& [sum, n] : sides)
                for (auto& v : sum) v /= static_cast<double>(n);
              total += nn::similarity_score(sides[0].first, sides[1].first);
              ++count;
            }
          }
          if (count == 0) continue;
          row.run_scores.push_back(total / static_cast<double>(count));
        }
      if (row.run_scores.empty())
        throw_data("too_few_samples", "no scorable test pairs for " + std::string(to_string(pa)) + "-" +
                                          std::string(to_string(pb)));
      row.score = summarize(row.run_scores);
      row.similar = row.score.mean > config.threshold;
      report.rows.push_back(std::move(row));
    }
  return report;
}

}  // namespace sonilab::eval
