#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sonilab::eval {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::size_t k = 5;
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  std::vector<std::vector<Fold>> runs;  // [repetition][fold]

  std::size_t run_count() const { return k * repetitions; }
};

/// Repeated stratified k-fold. Each class is shuffled with the repetition's
/// seed and dealt round-robin with one counter running across classes, so
/// fold sizes and per-class counts each differ by at most one.
/// Throws Error{Data, "too_few_samples"} when a class has fewer than k
/// samples.
FoldPlan stratified_cv(std::span<const int> labels, std::size_t k = 5, std::size_t repetitions = 10,
                       std::uint64_t seed = 0);

/// Seed of run (repetition, fold) derived from the master seed.
std::uint64_t run_seed(std::uint64_t master, std::size_t repetition, std::size_t fold);

}  // namespace sonilab::eval
