#include "sonilab/eval/labels.hpp"

#include "sonilab/error.hpp"

namespace sonilab::eval {

CognitiveLoad tlx_to_label(const TlxRating& rating, double threshold) {
  validate_tlx(rating);
  const double mean = (rating.effort + rating.mental_demand + rating.frustration) / 3.0;
  return mean > threshold ? CognitiveLoad::High : CognitiveLoad::Low;
}

void apply_tlx_labels(std::vector<Epoch>& epochs, const std::vector<TlxRating>& ratings,
                      const std::map<OrderKey, SubSessionOrder>& orders, double threshold) {
  std::map<std::tuple<std::string, SessionKind, Parameter>, CognitiveLoad> by_parameter;
  for (const auto& r : ratings) {
    if (r.practice) continue;
    const auto it = orders.find({r.participant, r.session});
    if (it == orders.end())
      throw_data("missing_order", "no sub-session order for participant '" + r.participant + "'");
    const auto p = it->second.at(static_cast<std::size_t>(r.sub_session - 1));
    by_parameter[{r.participant, r.session, p}] = tlx_to_label(r, threshold);
  }
  for (auto& e : epochs) {
    const auto it = by_parameter.find({e.labels.participant, e.labels.session, e.labels.parameter});
    if (it != by_parameter.end()) e.labels.cl_label = it->second;
  }
}

ExtremumSubset extremum_labels(const std::vector<EpochLabels>& labels, const std::set<int>& extremum) {
  ExtremumSubset out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].parameter == Parameter::Rough) continue;
    out.indices.push_back(i);
    out.labels.push_back(extremum.count(labels[i].focus_level) ? 1 : 0);
  }
  return out;
}

std::vector<int> cl_targets(const std::vector<EpochLabels>& labels) {
  std::vector<int> y;
  y.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i].cl_label) throw_data("unlabeled_epoch", "epoch " + std::to_string(i) + " has no CL label");
    y.push_back(*labels[i].cl_label == CognitiveLoad::High ? 1 : 0);
  }
  return y;
}

}  // namespace sonilab::eval
