#pragma once

// JSON text messages exchanged over the teleop WebSocket. Every message
// carries "v": 1 and a "type"; unknown fields are ignored on decode.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace skidsim::teleop {

inline constexpr int kProtocolVersion = 1;

// Decode failure. field() names the missing or malformed field ("" when the
// text is not JSON at all).
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& field, const std::string& what)
      : std::runtime_error(what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// client -> server
struct CommandMessage {
  std::int64_t t_client = 0;  // ms since epoch on the client clock
  double v_r_d = 0.0;
  double v_l_d = 0.0;
  std::optional<std::string> terrain_switch;
  bool estop = false;
  bool operator==(const CommandMessage&) const = default;
};

// client -> server: clears a latched estop.
struct ReleaseMessage {
  std::int64_t t_client = 0;
  bool operator==(const ReleaseMessage&) const = default;
};

// server -> client, once on connect and again if authority changes.
struct HelloMessage {
  bool authority = false;
  std::uint64_t connection_id = 0;
  double broadcast_hz = 20.0;
  double max_speed = 1.5;
  std::vector<std::string> terrains;
  bool operator==(const HelloMessage&) const = default;
};

struct SidePair {
  double r = 0.0;
  double l = 0.0;
  bool operator==(const SidePair&) const = default;
};

struct PoseChannel {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  bool operator==(const PoseChannel&) const = default;
};

// server -> clients at the broadcast rate.
struct TelemetryFrame {
  std::uint64_t seq = 0;
  double t_sim = 0.0;
  SidePair reference;
  SidePair measured;
  SidePair error;
  SidePair control;
  SidePair phi_hat;
  SidePair phi_norm;
  SidePair slip;
  PoseChannel pose;
  std::string terrain;
  std::vector<std::string> warnings;
  bool estop = false;
  bool watchdog = false;
  bool operator==(const TelemetryFrame&) const = default;
};

inline constexpr std::string_view kTelemetryChannels[] = {
    "seq",     "t_sim",    "reference", "measured", "error",   "control", "phi_hat",
    "phi_norm", "slip",    "pose",      "terrain",  "warnings", "estop",  "watchdog"};

// server -> client
struct ErrorMessage {
  std::string code;  // not_authority, malformed, out_of_range, unknown_terrain, unsupported
  std::string message;
  bool operator==(const ErrorMessage&) const = default;
};

using Message =
    std::variant<CommandMessage, ReleaseMessage, HelloMessage, TelemetryFrame, ErrorMessage>;

std::string encode(const Message& message);
Message decode(std::string_view text);

}  // namespace skidsim::teleop
