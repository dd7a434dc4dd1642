#include "sonilab/eval/mapping.hpp"

#include <map>

#include "sonilab/error.hpp"

namespace sonilab::eval {
namespace {

std::size_t parameter_index(Parameter p) {
  for (std::size_t i = 0; i < kAllParameters.size(); ++i)
    if (kAllParameters[i] == p) return i;
  return 0;
}

struct Tally {
  std::size_t correct = 0, total = 0;
  double rate() const { return static_cast<double>(correct) / static_cast<double>(total); }
};

}  // namespace

bool trial_correct(const TrialLog& log) {
  if (log.session == SessionKind::IR) return log.response && *log.response == log.focus_level;
  if (!log.target_level) throw_data("missing_target", "CR trial without a target level");
  const bool said_yes = log.response && *log.response == 1;
  return said_yes == (log.focus_level == *log.target_level);
}

MappingTables mapping_accuracy(const std::vector<TrialLog>& logs, SessionKind session) {
  // participant -> parameter -> tally (and per level)
  std::map<std::string, std::array<Tally, 6>> overall;
  std::map<std::string, std::array<std::array<Tally, kLevelCount>, 6>> by_level;
  std::array<std::size_t, 6> trials{};
  for (const auto& log : logs) {
    if (log.session != session) continue;
    if (log.focus_level < 1 || log.focus_level > kLevelCount)
      throw_data("marker_invalid", "focus level out of range in trial log");
    const auto p = parameter_index(log.parameter);
    const bool ok = trial_correct(log);
    auto& t = overall[log.participant][p];
    auto& tl = by_level[log.participant][p][static_cast<std::size_t>(log.focus_level - 1)];
    t.correct += ok, ++t.total;
    tl.correct += ok, ++tl.total;
    ++trials[p];
  }
  if (overall.empty()) throw_data("empty_logs", "no trials for session " + std::string(to_string(session)));

  MappingTables out;
  out.session = session;
  for (std::size_t p = 0; p < kAllParameters.size(); ++p) {
    std::vector<double> rates;
    for (const auto& [participant, tallies] : overall)
      if (tallies[p].total) rates.push_back(tallies[p].rate());
    out.rows.push_back({kAllParameters[p], summarize(rates), rates.size(), trials[p]});
    for (std::size_t l = 0; l < static_cast<std::size_t>(kLevelCount); ++l) {
      std::vector<double> level_rates;
      for (const auto& [participant, tallies] : by_level)
        if (tallies[p][l].total) level_rates.push_back(tallies[p][l].rate());
      if (!level_rates.empty()) out.per_level[p][l] = summarize(level_rates);
    }
  }
  return out;
}

}  // namespace sonilab::eval
