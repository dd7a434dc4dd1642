#include "sonilab/eval/report.hpp"

#include <algorithm>
#include <cstdio>

namespace sonilab::eval {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Left-aligned columns sized to their widest cell (cells are counted in
// code points so "±" does not skew the layout).
std::string render(const std::vector<std::vector<std::string>>& rows) {
  const auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
  };
  std::vector<std::size_t> w;
  for (const auto& r : rows) {
    w.resize(std::max(w.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], width(r[c]));
  }
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      line += rows[i][c];
      if (c + 1 < rows[i].size()) line += std::string(w[c] - width(rows[i][c]) + 2, ' ');
    }
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (auto x : w) total += x + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

nlohmann::json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

nlohmann::json to_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& m : r.per_run)
    runs.push_back({{"repetition", m.repetition},
                    {"fold", m.fold},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1},
                    {"accuracy", m.accuracy},
                    {"confusion", confusion_json(m.confusion)}});
  return {{"configuration", r.configuration},
          {"precision", to_json(r.precision)},
          {"recall", to_json(r.recall)},
          {"f1", to_json(r.f1)},
          {"accuracy", to_json(r.accuracy)},
          {"confusion_totals", confusion_json(r.totals)},
          {"runs", r.runs},
          {"skipped", r.skipped},
          {"per_run", runs}};
}

nlohmann::json to_json(const FusionReport& r) {
  return {{"temporal", to_json(r.temporal)}, {"spatial", to_json(r.spatial)}, {"fusion", to_json(r.fusion)}};
}

nlohmann::json to_json(const MappingTables& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t p = 0; p < t.rows.size(); ++p) {
    const auto& row = t.rows[p];
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& cell : t.per_level[p]) levels.push_back(cell ? to_json(*cell) : nlohmann::json());
    rows.push_back({{"parameter", to_string(row.parameter)},
                    {"accuracy", to_json(row.accuracy)},
                    {"participants", row.participants},
                    {"trials", row.trials},
                    {"per_level", levels}});
  }
  return {{"session", to_string(t.session)}, {"parameters", rows}};
}

nlohmann::json to_json(const SimilarityReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"pair", std::string(to_string(row.a)) + "-" + std::string(to_string(row.b))},
                    {"labels", std::string(to_string(row.label_a)) + "-" + std::string(to_string(row.label_b))},
                    {"score", to_json(row.score)},
                    {"verdict", row.similar ? "Similar" : "Dissimilar"},
                    {"run_scores", row.run_scores}});
  return {{"threshold", r.threshold}, {"runs_per_pair", r.runs_per_pair}, {"aggregation", to_string(r.aggregation)}, {"pairs", rows}};
}

nlohmann::json envelope(const std::string& kind, nlohmann::json payload) {
  return {{"schema_version", kReportSchemaVersion}, {"kind", kind}, {"report", std::move(payload)}};
}

std::string dump_report(const nlohmann::json& report) { return report.dump(2) + "\n"; }

std::string format_summary(const Summary& s, int digits) {
  return fixed(s.mean, digits) + "±" + fixed(s.std, digits);
}

std::string format_metrics_table(const std::vector<MetricsReport>& reports) {
  std::vector<std::vector<std::string>> rows{{"Configuration", "Precision", "Recall", "F1", "Runs"}};
  for (const auto& r : reports)
    rows.push_back({r.configuration, format_summary(r.precision), format_summary(r.recall), format_summary(r.f1),
                    std::to_string(r.runs)});
  return render(rows);
}

std::string format_mapping_table(const MappingTables& t) {
  std::vector<std::vector<std::string>> rows{{"Parameter", std::string(to_string(t.session)) + " accuracy"}};
  for (const auto& r : t.rows) rows.push_back({std::string(to_string(r.parameter)), format_summary(r.accuracy)});
  return render(rows);
}

std::string format_level_table(const MappingTables& t) {
  std::vector<std::vector<std::string>> rows{{"Parameter"}};
  for (int l = 1; l <= kLevelCount; ++l) rows[0].push_back("L" + std::to_string(l));
  for (std::size_t p = 0; p < t.rows.size(); ++p) {
    std::vector<std::string> row{std::string(to_string(t.rows[p].parameter))};
    for (const auto& cell : t.per_level[p]) row.push_back(cell ? fixed(cell->mean, 2) : "-");
    rows.push_back(row);
  }
  return render(rows);
}

std::string format_similarity_table(const SimilarityReport& r) {
  std::vector<std::vector<std::string>> rows{{"Pair", "CL labels", "Score", "Verdict"}};
  for (const auto& row : r.rows)
    rows.push_back({std::string(to_string(row.a)) + "-" + std::string(to_string(row.b)),
                    std::string(to_string(row.label_a)) + "-" + std::string(to_string(row.label_b)),
                    format_summary(row.score), row.similar ? "Similar" : "Dissimilar"});
  return render(rows);
}

}  // namespace sonilab::eval
