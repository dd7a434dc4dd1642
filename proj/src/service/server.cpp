#include "sonilab/service/server.hpp"

#include <httplib.h>

#include <json.hpp>
#include <regex>

#include "sonilab/error.hpp"
#include "sonilab/media_io.hpp"
#include "sonilab/stimulus.hpp"

namespace sonilab::service {
namespace {

using nlohmann::json;

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, {{"error", code}, {"message", message}});
}

HttpResponse from_reply(const Reply& r) { return json_response(r.status, r.body); }

std::string as_string(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace

Service::Service(ServiceConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {}

std::size_t Service::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t Service::stimulus_count() const {
  std::lock_guard lock(mutex_);
  return stimuli_.size();
}

Session* Service::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second.get();
}

void Service::ensure_stimuli() {
  if (!stimuli_.empty()) return;
  const Matrix reference = reference_image(config_.image_size, config_.seed);
  for (auto p : kAllParameters) {
    const std::string base = "/stimuli/" + coded_slug(p) + "/";
    for (int level = 1; level <= kLevelCount; ++level) {
      const auto lv = std::to_string(level);
      if (is_audio(p)) stimuli_[base + lv + ".wav"] = as_string(encode_wav(synth_audio(p, level, config_.audio_rate)));
      if (has_image(p)) stimuli_[base + lv + ".pgm"] = as_string(encode_pgm(blur_image(reference, level)));
    }
  }
}

HttpResponse Service::create_session(const std::string& body) {
  SessionSettings settings;
  try {
    const json j = body.empty() ? json::object() : json::parse(body);
    if (!j.is_object()) throw std::invalid_argument("object expected");
    for (const auto& [key, _] : j.items())
      if (key != "participant" && key != "session" && key != "seed" && key != "practice")
        throw std::invalid_argument("unknown field '" + key + "'");
    if (!j.contains("participant") || !j.at("participant").is_string() || j.at("participant").get<std::string>().empty())
      throw std::invalid_argument("participant required");
    settings.participant = j.at("participant").get<std::string>();
    settings.kind = parse_session_kind(j.value("session", std::string("IR")));
    settings.seed = j.value("seed", config_.seed);
    settings.practice = j.value("practice", false);
  } catch (const std::exception& e) {
    return error_response(422, "malformed_body", e.what());
  }
  std::lock_guard lock(mutex_);
  ensure_stimuli();
  const std::string id = "s" + std::to_string(next_id_++);
  sessions_[id] = std::make_unique<Session>(id, settings, clock_);
  return json_response(201, {{"session_id", id}, {"trials", sessions_[id]->plan().size()}});
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  static const std::regex session_route(R"(^/api/session/([A-Za-z0-9_-]+)/(next|response|tlx|export)$)");
  if (path == "/api/session") {
    if (method != "POST") return error_response(405, "method_not_allowed", method + " " + path);
    return create_session(body);
  }
  if (path.rfind("/stimuli/", 0) == 0) {
    if (method != "GET") return error_response(405, "method_not_allowed", method + " " + path);
    std::lock_guard lock(mutex_);
    auto it = stimuli_.find(path);
    if (it == stimuli_.end()) return error_response(404, "not_found", path);
    const bool wav = path.ends_with(".wav");
    return {200, wav ? "audio/wav" : "image/x-portable-graymap", it->second};
  }
  std::smatch m;
  if (!std::regex_match(path, m, session_route)) return error_response(404, "not_found", path);
  const std::string id = m[1], action = m[2];
  const bool is_get = action == "next" || action == "export";
  if (method != (is_get ? "GET" : "POST")) return error_response(405, "method_not_allowed", method + " " + path);

  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return error_response(404, "unknown_session", id);
  Session& s = *it->second;
  if (action == "next") return from_reply(s.next());
  if (action == "export") return from_reply(s.export_bundle());
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const std::exception& e) {
    return error_response(422, "malformed_body", e.what());
  }
  return from_reply(action == "response" ? s.respond(parsed) : s.submit_tlx(parsed));
}

void serve(Service& service, const ServiceConfig& config) {
  httplib::Server server;
  auto bind = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/.*)", bind);
  server.Post(R"(/.*)", bind);
  if (!server.listen(config.host, config.port))
    throw Error(ErrorKind::Usage, "bind_failed", "cannot listen on " + config.host + ":" + std::to_string(config.port));
}

}  // namespace sonilab::service
