#pragma once

// Session API over the engines. Each session keeps a cautious state on the
// clean tree and, once a hypothesis is set, a second one on the tree
// conditioned on that hypothesis; both always hold the same findings.
//
//   POST   /sessions                     {model}                  create
//   POST   /sessions/{id}/findings       {id, variable, state|likelihood}
//   DELETE /sessions/{id}/findings/{fid}
//   GET    /sessions/{id}/marginals
//   GET    /sessions/{id}/conflict
//   GET    /sessions/{id}/subsets
//   PUT    /sessions/{id}/hypothesis     {assignments, thresholds}
//   GET    /sessions/{id}/sensitivity
//   POST   /sessions/{id}/whatif         {finding_id, replacement}
//   GET    /sessions/{id}/tree

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "cautious/report_json.hpp"

namespace cautious {

struct ServiceResponse {
  int status = 200;
  Json body;
};

class SessionService {
 public:
  using Clock = std::chrono::steady_clock;

  struct Options {
    std::string model_dir;                                  // where named models are looked up
    std::chrono::seconds idle_timeout{std::chrono::minutes(30)};
  };

  SessionService() : SessionService(Options{}) {}
  explicit SessionService(Options options);
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  ServiceResponse handle(std::string_view method, std::string_view path, std::string_view body);

  std::size_t session_count() const;
  /// Drops sessions idle for longer than the timeout as of `now`.
  void evict_idle(Clock::time_point now);

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id);
  ServiceResponse create(const Json& body);
  ServiceResponse dispatch(Session& s, std::string_view method, const std::vector<std::string>& parts, const Json& body);

  Options options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// HTTP front end routing /sessions requests to a SessionService.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();

  /// Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  bool run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving `service` over HTTP until the process is stopped.
int serve(SessionService& service, const std::string& host, int port);

}  // namespace cautious
