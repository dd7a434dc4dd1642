#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sonilab/eval/labels.hpp"
#include "sonilab/types.hpp"

namespace sonilab::service {

inline constexpr double kFixationMs = 500.0;
inline constexpr double kStimulusMs = 2000.0;
inline constexpr double kIrResponseMs = 10000.0;
inline constexpr double kCrResponseMs = 3000.0;
inline constexpr std::size_t kSubSessions = 6;
inline constexpr std::size_t kTrialsPerSubSession = 30;  // 10 levels x 3

/// Monotonic milliseconds; injectable so tests control time.
using Clock = std::function<double()>;
Clock steady_clock_ms();

struct SessionSettings {
  std::string participant;
  SessionKind kind = SessionKind::IR;
  std::uint64_t seed = 0;
  bool practice = false;
};

struct PlannedTrial {
  int sub_session = 1;
  Parameter parameter = Parameter::Noise;
  int focus_level = 1;
};

/// Outcome of a client request: HTTP-style status plus JSON body.
struct Reply {
  int status = 200;
  nlohmann::json body;
};

/// Protocol state machine for one IR or CR session. Every trial passes
/// fixation -> stimulus -> response exactly once; a trial whose response
/// window closes without an answer is logged with an absent response and
/// the session advances. TLX ratings are accepted only between sub-sessions.
/// Not thread-safe; the service serializes access per session.
class Session {
public:
  Session(std::string id, SessionSettings settings, Clock clock);

  const std::string& id() const { return id_; }
  const SessionSettings& settings() const { return settings_; }
  const std::vector<PlannedTrial>& plan() const { return plan_; }
  const eval::SubSessionOrder& order() const { return order_; }
  const std::array<int, kSubSessions>& target_levels() const { return targets_; }
  const std::vector<TrialLog>& logs() const { return logs_; }
  const std::vector<TlxRating>& ratings() const { return ratings_; }
  double response_window_ms() const;

  /// Current trial (or the TLX/done marker). Repeated calls during a trial
  /// return the same descriptor.
  Reply next();
  /// Body: {"trial": index, "response": int|null, "latency_ms": number}.
  Reply respond(const nlohmann::json& body);
  /// Body: {"effort", "mental_demand", "frustration"} on the 1..4 scale.
  Reply submit_tlx(const nlohmann::json& body);
  /// Logs bundle including a markers CSV for the ingestion path; 409 until
  /// the session is complete.
  Reply export_bundle();

  bool finished() const;

private:
  enum class State { Idle, InTrial, AwaitTlx, Done };

  void expire_if_due(double now);
  void close_trial(std::optional<int> response, std::optional<double> latency_ms);
  nlohmann::json descriptor() const;

  std::string id_;
  SessionSettings settings_;
  Clock clock_;
  double started_ms_;
  eval::SubSessionOrder order_{};
  std::array<int, kSubSessions> targets_{};
  std::vector<PlannedTrial> plan_;
  std::size_t cursor_ = 0;       // next trial to serve
  State state_ = State::Idle;
  double trial_start_ms_ = 0.0;  // fixation onset of the current trial
  std::vector<TrialLog> logs_;
  std::vector<TlxRating> ratings_;
};

/// Markers for the logged trials; onsets are fixation starts converted to
/// EEG samples since session start.
std::vector<TrialMarker> markers_from_logs(const std::vector<TrialLog>& logs);

}  // namespace sonilab::service
