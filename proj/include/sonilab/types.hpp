#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonilab/matrix.hpp"

namespace sonilab {

inline constexpr std::size_t kChannelCount = 14;
inline constexpr double kEegSampleRate = 128.0;
inline constexpr std::size_t kFixationSamples = 64;   // 0.5 s
inline constexpr std::size_t kStimulusSamples = 256;  // 2.0 s
inline constexpr std::size_t kEpochSamples = kFixationSamples + kStimulusSamples;
inline constexpr int kLevelCount = 10;

/// The six data-to-stimulus mappings, in canonical order.
enum class Parameter { Noise, Pitch, Rough, AudioComb, Visual, VisualComb };
inline constexpr std::array<Parameter, 6> kAllParameters = {
    Parameter::Noise,     Parameter::Pitch,  Parameter::Rough,
    Parameter::AudioComb, Parameter::Visual, Parameter::VisualComb};

enum class SessionKind { IR, CR };

/// Binary cognitive-load class. Numeric value is the classifier label.
enum class CognitiveLoad { Low = 0, High = 1 };

std::string_view to_string(Parameter p);
std::string_view to_string(SessionKind s);
std::string_view to_string(CognitiveLoad c);

/// Parsers accept canonical names case-insensitively and throw
/// Error{Data, "unknown_label"} for anything else.
Parameter parse_parameter(std::string_view text);
SessionKind parse_session_kind(std::string_view text);
CognitiveLoad parse_cognitive_load(std::string_view text);

/// Coded participant-facing name, "Type 1".."Type 6".
std::string coded_name(Parameter p);
/// URL slug "type1".."type6".
std::string coded_slug(Parameter p);
/// Accepts canonical names or coded slugs.
Parameter parse_parameter_or_code(std::string_view text);

bool is_audio(Parameter p);
bool has_image(Parameter p);

struct TrialMarker {
  std::size_t onset = 0;  // sample index of fixation start
  Parameter parameter = Parameter::Noise;
  int focus_level = 1;
  SessionKind session = SessionKind::IR;
  std::string participant;
  /// IR: rating 1..10. CR: 1 = yes, 0 = no.
  std::optional<int> response;
  std::optional<double> latency_ms;

  bool operator==(const TrialMarker&) const = default;
};

/// Throws Error{Data, "marker_invalid"} on focus/response/latency violations.
void validate_marker(const TrialMarker& m);

struct RawRecording {
  double sample_rate = kEegSampleRate;
  Matrix data;  // channels x samples, microvolts
  std::vector<TrialMarker> markers;
};

/// Throws on channel count, marker order, or marker window violations.
void validate_recording(const RawRecording& rec);

struct EpochLabels {
  std::optional<CognitiveLoad> cl_label;
  Parameter parameter = Parameter::Noise;
  int focus_level = 1;
  SessionKind session = SessionKind::IR;
  std::string participant;

  bool operator==(const EpochLabels&) const = default;
};

struct Epoch {
  Matrix fixation;  // 14 x 64
  Matrix stimulus;  // 14 x 256
  EpochLabels labels;

  bool operator==(const Epoch&) const = default;
};

Epoch make_epoch(EpochLabels labels);
/// Throws Error{Data, "epoch_shape"} / "epoch_nonfinite".
void validate_epoch(const Epoch& e);

/// Questionnaire rating on the 1..4 scale.
struct TlxRating {
  int effort = 1;
  int mental_demand = 1;
  int frustration = 1;
  std::string participant;
  SessionKind session = SessionKind::IR;
  int sub_session = 1;
  bool practice = false;

  bool operator==(const TlxRating&) const = default;
};

inline constexpr int kTlxMin = 1;
inline constexpr int kTlxMax = 4;
void validate_tlx(const TlxRating& r);

/// One protocol trial as logged by the session service.
struct TrialLog {
  std::string participant;
  SessionKind session = SessionKind::IR;
  int sub_session = 1;
  Parameter parameter = Parameter::Noise;
  int focus_level = 1;
  std::optional<int> target_level;  // CR only
  std::optional<int> response;      // IR rating, or CR 1/0
  std::optional<double> latency_ms;
  double onset_ms = 0.0;  // fixation start relative to session start

  bool operator==(const TrialLog&) const = default;
};

}  // namespace sonilab
