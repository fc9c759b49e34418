#pragma once

// WebSocket teleop service: /ws for the protocol, /healthz for liveness.
// One network thread and one sim thread, joined only by two message queues.

#include <cstdint>
#include <memory>
#include <string>

#include "skidsim/engine.hpp"
#include "skidsim/teleop/session.hpp"

namespace skidsim::teleop {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  SessionOptions session;
};

class TeleopServer {
 public:
  TeleopServer(ScenarioConfig config, ServerOptions options = {});
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  // Binds and starts both threads; throws std::system_error if the port is
  // taken.
  void start();
  // Idempotent.
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

  unsigned short port() const;
  double t_sim() const;
  std::size_t connections() const;
  std::uint64_t protocol_errors() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace skidsim::teleop
