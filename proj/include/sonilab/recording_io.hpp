#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sonilab/types.hpp"

namespace sonilab {

/// Recording CSV: header row of the 14 channel names in layout order, then
/// one row per sample in microvolts. Markers live in a sibling CSV with
/// columns onset,parameter,focus_level,session,participant,response,latency_ms.
RawRecording read_recording(const std::filesystem::path& recording_csv,
                            const std::filesystem::path& markers_csv);
/// Uses the sibling naming convention `<stem>.markers.csv`.
RawRecording read_recording(const std::filesystem::path& recording_csv);
void write_recording(const RawRecording& rec, const std::filesystem::path& recording_csv,
                     const std::filesystem::path& markers_csv);

std::filesystem::path markers_path_for(const std::filesystem::path& recording_csv);

std::vector<TrialMarker> parse_markers_csv(const std::string& text);
std::string format_markers_csv(const std::vector<TrialMarker>& markers);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

}  // namespace sonilab
