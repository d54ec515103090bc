// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/model.hpp"
#include "ctsdr/session.hpp"

#include <memory>
#include <string>

namespace ctsdr {

struct ServerOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  RobotConfig config = default_robot_config();
  SessionOptions session;
};

/// HTTP GET /health and /scenarios, WebSocket sessions at /session/{id}.
/// Everything runs on one internal I/O thread.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving in the background. Throws Io on bind failure.
  void start();
  /// Bound port, valid after start().
  unsigned short port() const;
  /// Closes every connection and joins the I/O thread. Idempotent.
  void stop();
  /// Blocks until stop() is called or SIGINT/SIGTERM arrives.
  void wait_for_signal();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctsdr
