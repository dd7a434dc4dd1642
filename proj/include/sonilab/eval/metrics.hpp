#pragma once

#include <span>
#include <string>
#include <vector>

namespace sonilab::eval {

/// Binary confusion counts with class 1 as "positive".
struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o);
};

Confusion confusion(std::span<const int> truth, std::span<const int> predicted);

/// Macro averages over both classes; a class with no predictions (or no
/// members) contributes 0 to precision (recall).
struct RunMetrics {
  std::size_t repetition = 0, fold = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0;
  Confusion confusion;
};

RunMetrics score_run(std::span<const int> truth, std::span<const int> predicted);
double micro_recall(const Confusion& c);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

Summary summarize(std::span<const double> values);

struct MetricsReport {
  std::string configuration;
  Summary precision, recall, f1, accuracy;
  Confusion totals;
  std::size_t runs = 0;
  std::size_t skipped = 0;  // degenerate folds
  std::vector<RunMetrics> per_run;
};

MetricsReport aggregate(std::string configuration, std::vector<RunMetrics> runs, std::size_t skipped);

}  // namespace sonilab::eval
