#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sonilab/types.hpp"

namespace sonilab::eval {

inline constexpr double kTlxThreshold = 2.0;

/// High iff mean(effort, mental demand, frustration) > threshold; a mean of
/// exactly the threshold is Low.
CognitiveLoad tlx_to_label(const TlxRating& rating, double threshold = kTlxThreshold);

/// Sub-session order of one participant's session: parameter presented in
/// sub-session i + 1.
using SubSessionOrder = std::array<Parameter, 6>;
using OrderKey = std::pair<std::string, SessionKind>;  // participant, session

/// Propagates each non-practice TLX label to every epoch of its sub-session.
/// Epochs whose sub-session has no rating are left unlabeled.
void apply_tlx_labels(std::vector<Epoch>& epochs, const std::vector<TlxRating>& ratings,
                      const std::map<OrderKey, SubSessionOrder>& orders, double threshold = kTlxThreshold);

inline const std::set<int> kExtremumLevels = {1, 2, 9, 10};

/// Extremum (1) vs Intermediate (0) labels for every non-Rough epoch.
struct ExtremumSubset {
  std::vector<std::size_t> indices;  // into the input
  std::vector<int> labels;
};

ExtremumSubset extremum_labels(const std::vector<EpochLabels>& labels,
                               const std::set<int>& extremum = kExtremumLevels);

/// Binary CL labels (High = 1); throws Error{Data, "unlabeled_epoch"} if any
/// epoch lacks one.
std::vector<int> cl_targets(const std::vector<EpochLabels>& labels);

}  // namespace sonilab::eval
