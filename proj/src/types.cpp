#include "sonilab/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "sonilab/error.hpp"

namespace sonilab {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(Parameter p) {
  switch (p) {
    case Parameter::Noise: return "Noise";
    case Parameter::Pitch: return "Pitch";
    case Parameter::Rough: return "Rough";
    case Parameter::AudioComb: return "AudioComb";
    case Parameter::Visual: return "Visual";
    case Parameter::VisualComb: return "VisualComb";
  }
  return "?";
}

std::string_view to_string(SessionKind s) { return s == SessionKind::IR ? "IR" : "CR"; }

std::string_view to_string(CognitiveLoad c) { return c == CognitiveLoad::High ? "High" : "Low"; }

Parameter parse_parameter(std::string_view text) {
  for (Parameter p : kAllParameters)
    if (iequals(text, to_string(p))) return p;
  throw_data("unknown_label", "unknown parameter '" + std::string(text) + "'");
}

SessionKind parse_session_kind(std::string_view text) {
  if (iequals(text, "IR")) return SessionKind::IR;
  if (iequals(text, "CR")) return SessionKind::CR;
  throw_data("unknown_label", "unknown session kind '" + std::string(text) + "'");
}

CognitiveLoad parse_cognitive_load(std::string_view text) {
  if (iequals(text, "High")) return CognitiveLoad::High;
  if (iequals(text, "Low")) return CognitiveLoad::Low;
  throw_data("unknown_label", "unknown cognitive load label '" + std::string(text) + "'");
}

std::string coded_name(Parameter p) {
  return "Type " + std::to_string(static_cast<int>(p) + 1);
}

std::string coded_slug(Parameter p) {
  return "type" + std::to_string(static_cast<int>(p) + 1);
}

Parameter parse_parameter_or_code(std::string_view text) {
  for (Parameter p : kAllParameters)
    if (iequals(text, coded_slug(p))) return p;
  return parse_parameter(text);
}

bool is_audio(Parameter p) { return p != Parameter::Visual; }

bool has_image(Parameter p) { return p == Parameter::Visual || p == Parameter::VisualComb; }

void validate_marker(const TrialMarker& m) {
  if (m.focus_level < 1 || m.focus_level > kLevelCount)
    throw_data("marker_invalid", "focus_level " + std::to_string(m.focus_level) +
                                     " outside [1,10]");
  if (m.response) {
    if (m.session == SessionKind::IR && (*m.response < 1 || *m.response > kLevelCount))
      throw_data("marker_invalid", "IR response outside [1,10]");
    if (m.session == SessionKind::CR && *m.response != 0 && *m.response != 1)
      throw_data("marker_invalid", "CR response must be yes/no");
  }
  if (m.latency_ms) {
    const double limit = m.session == SessionKind::IR ? 10000.0 : 3000.0;
    if (!(*m.latency_ms >= 0.0) || *m.latency_ms > limit)
      throw_data("marker_invalid", "latency outside response window");
  }
}

void validate_recording(const RawRecording& rec) {
  if (rec.data.rows() != kChannelCount)
    throw_data("channel_count", "recording has " + std::to_string(rec.data.rows()) +
                                    " channels, expected 14");
  const std::size_t length = rec.data.cols();
  for (std::size_t i = 0; i < rec.markers.size(); ++i) {
    const auto& m = rec.markers[i];
    validate_marker(m);
    if (i > 0 && m.onset <= rec.markers[i - 1].onset)
      throw_data("marker_order", "marker onsets not strictly increasing at index " +
                                     std::to_string(i));
    if (m.onset + kEpochSamples > length)
      throw_data("marker_bounds", "marker at onset " + std::to_string(m.onset) + " needs " +
                                      std::to_string(m.onset + kEpochSamples) +
                                      " samples, recording has " + std::to_string(length));
  }
}

Epoch make_epoch(EpochLabels labels) {
  return Epoch{Matrix(kChannelCount, kFixationSamples), Matrix(kChannelCount, kStimulusSamples),
               std::move(labels)};
}

void validate_epoch(const Epoch& e) {
  if (e.fixation.rows() != kChannelCount || e.fixation.cols() != kFixationSamples ||
      e.stimulus.rows() != kChannelCount || e.stimulus.cols() != kStimulusSamples)
    throw_data("epoch_shape", "epoch must be 14x64 fixation + 14x256 stimulus");
  auto finite = [](const Matrix& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
  };
  if (!finite(e.fixation) || !finite(e.stimulus))
    throw_data("epoch_nonfinite", "epoch contains non-finite samples");
  if (e.labels.focus_level < 1 || e.labels.focus_level > kLevelCount)
    throw_data("epoch_labels", "focus_level outside [1,10]");
}

void validate_tlx(const TlxRating& r) {
  for (int v : {r.effort, r.mental_demand, r.frustration})
    if (v < kTlxMin || v > kTlxMax)
      throw_data("tlx_range", "TLX attribute " + std::to_string(v) + " outside [1,4]");
  if (r.sub_session < 1 || r.sub_session > 6)
    throw_data("tlx_range", "sub_session outside [1,6]");
}

}  // namespace sonilab
