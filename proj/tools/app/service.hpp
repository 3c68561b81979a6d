#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "session.hpp"

namespace hcn::app {

struct ServiceOptions {
  /// Directory served under `/`; a built-in page is used when empty.
  std::filesystem::path static_dir;
  Clock::duration idle_timeout = std::chrono::minutes(30);
  std::size_t top_k = 5;
};

/// HTTP front end:
///   POST /api/session                       → 201 {"session_id"}
///   POST /api/session/{id}/message {"text"} → 200 {"reply", "template", "action_id", "top_k"}
///   GET  /api/session/{id}/transcript       → 200 [entries]
///   GET  /api/health                        → 200 {"checkpoint": fingerprint}
/// Without a checkpoint every API route answers 503.
class Service {
 public:
  explicit Service(std::shared_ptr<const dm::Checkpoint> checkpoint, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to host on a free port and returns it.
  int bind_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hcn::app
