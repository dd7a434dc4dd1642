#include "sonilab/service/session.hpp"

#include <chrono>
#include <cmath>

#include "sonilab/error.hpp"
#include "sonilab/recording_io.hpp"
#include "sonilab/rng.hpp"

namespace sonilab::service {
namespace {

Reply error_reply(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", code}, {"message", message}}};
}

std::optional<int> optional_int(const nlohmann::json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  if (!body.at(key).is_number_integer()) throw std::invalid_argument(std::string(key) + " must be an integer");
  return body.at(key).get<int>();
}

}  // namespace

Clock steady_clock_ms() {
  return [] {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
  };
}

Session::Session(std::string id, SessionSettings settings, Clock clock)
    : id_(std::move(id)), settings_(std::move(settings)), clock_(std::move(clock)), started_ms_(clock_()) {
  Rng rng(settings_.seed);
  for (std::size_t i = 0; i < kSubSessions; ++i) order_[i] = kAllParameters[i];
  rng.shuffle(std::span<Parameter>(order_));
  for (std::size_t s = 0; s < kSubSessions; ++s) {
    targets_[s] = static_cast<int>(rng.below(kLevelCount)) + 1;
    std::vector<int> levels;
    for (int rep = 0; rep < 3; ++rep)
      for (int l = 1; l <= kLevelCount; ++l) levels.push_back(l);
    rng.shuffle(levels);
    for (int l : levels) plan_.push_back({static_cast<int>(s) + 1, order_[s], l});
  }
}

double Session::response_window_ms() const {
  return settings_.kind == SessionKind::IR ? kIrResponseMs : kCrResponseMs;
}

bool Session::finished() const { return state_ == State::Done; }

void Session::close_trial(std::optional<int> response, std::optional<double> latency_ms) {
  const auto& t = plan_[cursor_];
  TrialLog log;
  log.participant = settings_.participant;
  log.session = settings_.kind;
  log.sub_session = t.sub_session;
  log.parameter = t.parameter;
  log.focus_level = t.focus_level;
  if (settings_.kind == SessionKind::CR) log.target_level = targets_[static_cast<std::size_t>(t.sub_session - 1)];
  log.response = response;
  log.latency_ms = latency_ms;
  log.onset_ms = trial_start_ms_ - started_ms_;
  logs_.push_back(log);
  ++cursor_;
  if (cursor_ == plan_.size()) state_ = State::AwaitTlx;
  else if (cursor_ % kTrialsPerSubSession == 0) state_ = State::AwaitTlx;
  else state_ = State::Idle;
}

void Session::expire_if_due(double now) {
  if (state_ != State::InTrial) return;
  if (now - trial_start_ms_ > kFixationMs + kStimulusMs + response_window_ms()) close_trial(std::nullopt, std::nullopt);
}

nlohmann::json Session::descriptor() const {
  const auto& t = plan_[cursor_];
  const auto slug = coded_slug(t.parameter);
  nlohmann::json d = {{"kind", "trial"},
                      {"trial", cursor_},
                      {"sub_session", t.sub_session},
                      {"type", coded_name(t.parameter)},
                      {"session", to_string(settings_.kind)},
                      {"phases", {{"fixation_ms", kFixationMs}, {"stimulus_ms", kStimulusMs}, {"response_ms", response_window_ms()}}},
                      {"started_ms", trial_start_ms_ - started_ms_}};
  const auto level = std::to_string(t.focus_level);
  if (is_audio(t.parameter)) d["stimulus_url"] = "/stimuli/" + slug + "/" + level + ".wav";
  if (has_image(t.parameter)) d["image_url"] = "/stimuli/" + slug + "/" + level + ".pgm";
  if (settings_.kind == SessionKind::CR) d["target_level"] = targets_[static_cast<std::size_t>(t.sub_session - 1)];
  return d;
}

Reply Session::next() {
  const double now = clock_();
  expire_if_due(now);
  switch (state_) {
    case State::Done: return {200, {{"kind", "done"}, {"trials", logs_.size()}}};
    case State::AwaitTlx:
      return {200, {{"kind", "tlx"}, {"sub_session", plan_[cursor_ - 1].sub_session}}};
    case State::InTrial: return {200, descriptor()};
    case State::Idle:
      state_ = State::InTrial;
      trial_start_ms_ = now;
      return {200, descriptor()};
  }
  return {500, {}};
}

Reply Session::respond(const nlohmann::json& body) {
  std::optional<int> response;
  std::optional<double> latency;
  std::size_t trial = 0;
  try {
    if (!body.is_object() || !body.contains("trial") || !body.at("trial").is_number_integer() ||
        body.at("trial").get<std::int64_t>() < 0)
      throw std::invalid_argument("trial index required");
    trial = body.at("trial").get<std::size_t>();
    response = optional_int(body, "response");
    if (body.contains("latency_ms") && !body.at("latency_ms").is_null()) {
      if (!body.at("latency_ms").is_number()) throw std::invalid_argument("latency_ms must be a number");
      latency = body.at("latency_ms").get<double>();
      if (!(*latency >= 0.0)) throw std::invalid_argument("latency_ms must be >= 0");
    }
  } catch (const std::exception& e) {
    return error_reply(422, "malformed_body", e.what());
  }
  const double now = clock_();
  if (state_ != State::InTrial || trial != cursor_)
    return error_reply(409, "not_current_trial", "trial " + std::to_string(trial) + " is not the current trial");
  const double response_open = trial_start_ms_ + kFixationMs + kStimulusMs;
  if (now > response_open + response_window_ms()) {
    expire_if_due(now);
    return error_reply(409, "response_timeout", "response window closed; trial logged without a response");
  }
  if (now < response_open) return error_reply(409, "not_in_response_phase", "responses open after the stimulus");
  if (response) {
    const bool ok = settings_.kind == SessionKind::IR ? (*response >= 1 && *response <= kLevelCount)
                                                      : (*response == 0 || *response == 1);
    if (!ok) return error_reply(422, "bad_response", "response out of range for this session kind");
  }
  if (latency && *latency > response_window_ms())
    return error_reply(422, "bad_latency", "latency exceeds the response window");
  close_trial(response, latency ? latency : std::optional<double>(now - response_open));
  return {200, {{"accepted", true}, {"trial", trial}}};
}

Reply Session::submit_tlx(const nlohmann::json& body) {
  expire_if_due(clock_());
  TlxRating r;
  try {
    if (!body.is_object()) throw std::invalid_argument("object expected");
    for (const char* key : {"effort", "mental_demand", "frustration"})
      if (!body.contains(key) || !body.at(key).is_number_integer())
        throw std::invalid_argument(std::string(key) + " must be an integer");
    r.effort = body.at("effort").get<int>();
    r.mental_demand = body.at("mental_demand").get<int>();
    r.frustration = body.at("frustration").get<int>();
    r.participant = settings_.participant;
    r.session = settings_.kind;
    r.practice = settings_.practice;
    if (state_ == State::AwaitTlx) r.sub_session = plan_[cursor_ - 1].sub_session;
    validate_tlx(r);
  } catch (const std::exception& e) {
    return error_reply(422, "malformed_body", e.what());
  }
  if (state_ != State::AwaitTlx)
    return error_reply(409, "not_at_boundary", "TLX ratings are accepted only after a sub-session");
  ratings_.push_back(r);
  state_ = cursor_ == plan_.size() ? State::Done : State::Idle;
  return {200, {{"accepted", true}, {"sub_session", r.sub_session}}};
}

std::vector<TrialMarker> markers_from_logs(const std::vector<TrialLog>& logs) {
  std::vector<TrialMarker> out;
  for (const auto& l : logs) {
    TrialMarker m;
    m.onset = static_cast<std::size_t>(std::llround(l.onset_ms * kEegSampleRate / 1000.0));
    m.parameter = l.parameter;
    m.focus_level = l.focus_level;
    m.session = l.session;
    m.participant = l.participant;
    m.response = l.response;
    m.latency_ms = l.latency_ms;
    out.push_back(m);
  }
  return out;
}

Reply Session::export_bundle() {
  expire_if_due(clock_());
  // The bundle names parameters in clear; never hand it out mid-session.
  if (!finished()) return error_reply(409, "session_running", "export is available once the session is complete");
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& l : logs_) {
    trials.push_back({{"participant", l.participant},
                      {"session", to_string(l.session)},
                      {"sub_session", l.sub_session},
                      {"parameter", to_string(l.parameter)},
                      {"focus_level", l.focus_level},
                      {"target_level", l.target_level ? nlohmann::json(*l.target_level) : nlohmann::json()},
                      {"response", l.response ? nlohmann::json(*l.response) : nlohmann::json()},
                      {"latency_ms", l.latency_ms ? nlohmann::json(*l.latency_ms) : nlohmann::json()},
                      {"onset_ms", l.onset_ms}});
  }
  nlohmann::json tlx = nlohmann::json::array();
  for (const auto& r : ratings_) {
    if (r.practice) continue;
    tlx.push_back({{"participant", r.participant},
                   {"session", to_string(r.session)},
                   {"sub_session", r.sub_session},
                   {"effort", r.effort},
                   {"mental_demand", r.mental_demand},
                   {"frustration", r.frustration}});
  }
  nlohmann::json order = nlohmann::json::array();
  for (auto p : order_) order.push_back(to_string(p));
  return {200,
          {{"session_id", id_},
           {"participant", settings_.participant},
           {"session", to_string(settings_.kind)},
           {"practice", settings_.practice},
           {"complete", finished()},
           {"sub_session_order", order},
           {"target_levels", targets_},
           {"trials", trials},
           {"tlx", tlx},
           {"markers_csv", format_markers_csv(markers_from_logs(logs_))}}};
}

}  // namespace sonilab::service
