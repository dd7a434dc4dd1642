#include "sonilab/eval/metrics.hpp"

#include <cmath>

#include "sonilab/error.hpp"

namespace sonilab::eval {

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
  return *this;
}

Confusion confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw_usage("shape_mismatch", "truth and prediction lengths differ");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == 1, p = predicted[i] == 1;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (!t && !p) ++c.tn;
    else ++c.fn;
  }
  return c;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

RunMetrics score_run(std::span<const int> truth, std::span<const int> predicted) {
  RunMetrics m;
  m.confusion = confusion(truth, predicted);
  const auto& c = m.confusion;
  const double p1 = ratio(c.tp, c.tp + c.fp), r1 = ratio(c.tp, c.tp + c.fn);
  const double p0 = ratio(c.tn, c.tn + c.fn), r0 = ratio(c.tn, c.tn + c.fp);
  m.precision = (p0 + p1) / 2.0;
  m.recall = (r0 + r1) / 2.0;
  m.f1 = (f1(p0, r0) + f1(p1, r1)) / 2.0;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  return m;
}

double micro_recall(const Confusion& c) {
  // Pooled over both classes: every sample is a member of exactly one class.
  return ratio(c.tp + c.tn, (c.tp + c.fn) + (c.tn + c.fp));
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

MetricsReport aggregate(std::string configuration, std::vector<RunMetrics> runs, std::size_t skipped) {
  MetricsReport r;
  r.configuration = std::move(configuration);
  std::vector<double> p, rc, f, a;
  for (const auto& m : runs) {
    p.push_back(m.precision);
    rc.push_back(m.recall);
    f.push_back(m.f1);
    a.push_back(m.accuracy);
    r.totals += m.confusion;
  }
  r.precision = summarize(p);
  r.recall = summarize(rc);
  r.f1 = summarize(f);
  r.accuracy = summarize(a);
  r.runs = runs.size();
  r.skipped = skipped;
  r.per_run = std::move(runs);
  return r;
}

}  // namespace sonilab::eval
