#pragma once

// The simulated robot behind the teleop server, one controller tick at a
// time. Knows nothing about sockets; the server feeds it decoded messages.

#include <optional>

#include "skidsim/engine.hpp"
#include "skidsim/teleop/protocol.hpp"

namespace skidsim::teleop {

struct SessionOptions {
  double broadcast_hz = 20.0;
  double max_speed = 1.5;  // m/s, per side
  double max_accel = 1.0;  // m/s^2 slew limit on joystick steps
};

class TeleopSession {
 public:
  // The profile is forced to teleop; duration is ignored.
  TeleopSession(ScenarioConfig config, SessionOptions options = {});

  // Commands and releases from the authoritative client. Returns the error
  // to send back when the message is rejected.
  std::optional<ErrorMessage> apply(const Message& message);

  // One controller period. A numerical fault latches estop and is reported
  // as a warning; the session then holds still.
  void tick();

  TelemetryFrame snapshot() const;

  double t_sim() const { return sim_.time(); }
  double period() const { return sim_.period(); }
  // Controller ticks between telemetry broadcasts.
  int ticks_per_broadcast() const { return ticks_per_broadcast_; }
  bool faulted() const { return faulted_; }
  const SessionOptions& options() const { return options_; }
  std::uint64_t dropped_commands() const;

 private:
  SessionOptions options_;
  Simulation sim_;
  TraceRecord last_;
  int ticks_per_broadcast_;
  mutable std::uint64_t seq_ = 0;
  bool faulted_ = false;
  std::vector<std::string> warnings_;
};

}  // namespace skidsim::teleop
