#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "sonilab/eval/evaluate.hpp"
#include "sonilab/eval/mapping.hpp"
#include "sonilab/eval/similarity.hpp"

namespace sonilab::eval {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const FusionReport& r);
nlohmann::json to_json(const MappingTables& t);
nlohmann::json to_json(const SimilarityReport& r);

/// Wraps a payload with {"schema_version", "kind"}; serialization uses sorted
/// keys, so equal reports are byte-identical.
nlohmann::json envelope(const std::string& kind, nlohmann::json payload);
std::string dump_report(const nlohmann::json& report);

/// "0.98±0.01"
std::string format_summary(const Summary& s, int digits = 2);

/// Configuration | Precision | Recall | F1 (one row per report).
std::string format_metrics_table(const std::vector<MetricsReport>& reports);
/// Parameter | Accuracy, one row per parameter.
std::string format_mapping_table(const MappingTables& tables);
/// Parameter x focus level accuracy grid.
std::string format_level_table(const MappingTables& tables);
/// Pair | CL labels | Score | Verdict.
std::string format_similarity_table(const SimilarityReport& report);

}  // namespace sonilab::eval
