#include "sonilab/eval/cv.hpp"

#include <algorithm>
#include <map>

#include "sonilab/error.hpp"
#include "sonilab/rng.hpp"

namespace sonilab::eval {

FoldPlan stratified_cv(std::span<const int> labels, std::size_t k, std::size_t repetitions, std::uint64_t seed) {
  if (k < 2) throw_usage("bad_folds", "k must be at least 2");
  if (repetitions == 0) throw_usage("bad_repetitions", "at least one repetition is required");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class)
    if (members.size() < k)
      throw_data("too_few_samples", "class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                                        " samples, fewer than k = " + std::to_string(k));

  FoldPlan plan{k, repetitions, seed, {}};
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    Rng rng(mix_seed(seed, rep));
    std::vector<std::vector<std::size_t>> test(k);
    std::size_t counter = 0;
    for (auto [label, members] : by_class) {
      rng.shuffle(members);
      for (auto idx : members) test[counter++ % k].push_back(idx);
    }
    std::vector<Fold> folds(k);
    for (std::size_t f = 0; f < k; ++f) {
      std::sort(test[f].begin(), test[f].end());
      folds[f].test = test[f];
      for (std::size_t g = 0; g < k; ++g)
        if (g != f) folds[f].train.insert(folds[f].train.end(), test[g].begin(), test[g].end());
      std::sort(folds[f].train.begin(), folds[f].train.end());
    }
    plan.runs.push_back(std::move(folds));
  }
  return plan;
}

std::uint64_t run_seed(std::uint64_t master, std::size_t repetition, std::size_t fold) {
  return mix_seed(mix_seed(master, 0x5eed0000 + repetition), fold);
}

}  // namespace sonilab::eval
