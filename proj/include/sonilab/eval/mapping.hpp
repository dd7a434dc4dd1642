#pragma once

#include <array>
#include <optional>
#include <vector>

#include "sonilab/eval/metrics.hpp"
#include "sonilab/types.hpp"

namespace sonilab::eval {

/// IR: response == true level. CR: a "yes" on the target level or a "no"
/// (including a timeout) on any other level.
bool trial_correct(const TrialLog& log);

struct MappingRow {
  Parameter parameter = Parameter::Noise;
  Summary accuracy;  // mean +- std across participants
  std::size_t participants = 0;
  std::size_t trials = 0;
};

struct MappingTables {
  SessionKind session = SessionKind::IR;
  std::vector<MappingRow> rows;  // one per parameter, canonical order
  /// [parameter][level - 1]: mean +- std across participants; empty when the
  /// level never occurred for that parameter.
  std::array<std::array<std::optional<Summary>, kLevelCount>, 6> per_level;
};

/// Throws Error{Data, "empty_logs"} for no trials of the requested session.
MappingTables mapping_accuracy(const std::vector<TrialLog>& logs, SessionKind session);

}  // namespace sonilab::eval
