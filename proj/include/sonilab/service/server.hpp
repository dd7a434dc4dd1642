#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sonilab/service/session.hpp"

namespace sonilab::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 1;
  double audio_rate = 44100.0;
  std::size_t image_size = 128;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Request router for the session API. Transport-agnostic: `handle` is what
/// the HTTP binding calls, and what tests call directly.
class Service {
public:
  explicit Service(ServiceConfig config, Clock clock = steady_clock_ms());

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  Session* find(const std::string& id);
  std::size_t session_count() const;
  std::size_t stimulus_count() const;

private:
  void ensure_stimuli();
  HttpResponse create_session(const std::string& body);

  ServiceConfig config_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::map<std::string, std::string> stimuli_;  // path -> bytes
  std::uint64_t next_id_ = 1;
};

/// Blocks serving `service` over HTTP until the process is stopped.
void serve(Service& service, const ServiceConfig& config);

}  // namespace sonilab::service
