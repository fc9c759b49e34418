#include "skidsim/teleop/session.hpp"

#include <fmt/format.h>

#include <cmath>

#include "skidsim/errors.hpp"

namespace skidsim::teleop {

namespace {

ScenarioConfig teleop_config(ScenarioConfig config, const SessionOptions& options) {
  config.profile = TeleopProfile{};
  if (!config.teleop_max_accel) config.teleop_max_accel = options.max_accel;
  return config;
}

}  // namespace

TeleopSession::TeleopSession(ScenarioConfig config, SessionOptions options)
    : options_(options),
      sim_(teleop_config(std::move(config), options)),
      ticks_per_broadcast_(std::max(1, static_cast<int>(std::lround(
                                           1.0 / (options.broadcast_hz * sim_.period()))))) {
  if (!(options.broadcast_hz > 0.0)) throw ConfigError("broadcast rate must be > 0");
  if (!(options.max_speed > 0.0)) throw ConfigError("max_speed must be > 0");
  last_.s_r = sim_.plant().s_right;
  last_.s_l = sim_.plant().s_left;
}

std::optional<ErrorMessage> TeleopSession::apply(const Message& message) {
  TeleopReference& ref = *sim_.teleop();
  if (const auto* release = std::get_if<ReleaseMessage>(&message)) {
    (void)release;
    ref.release();
    return std::nullopt;
  }
  const auto* cmd = std::get_if<CommandMessage>(&message);
  if (!cmd) return ErrorMessage{"unsupported", "only command and release messages are accepted"};

  if (cmd->terrain_switch) {
    auto terrain = find_builtin_terrain(*cmd->terrain_switch);
    if (!terrain) {
      return ErrorMessage{"unknown_terrain",
                          fmt::format("unknown terrain \"{}\"", *cmd->terrain_switch)};
    }
    terrain->disturbance = sim_.terrain().disturbance;
    sim_.set_terrain(*terrain);
  }
  if (cmd->estop) {
    ref.estop();
    return std::nullopt;
  }
  if (!std::isfinite(cmd->v_r_d) || !std::isfinite(cmd->v_l_d) ||
      std::abs(cmd->v_r_d) > options_.max_speed || std::abs(cmd->v_l_d) > options_.max_speed) {
    return ErrorMessage{"out_of_range",
                        fmt::format("side speeds must be finite and within +/-{} m/s",
                                    options_.max_speed)};
  }
  ref.push(TeleopCommandSample{cmd->t_client, cmd->v_r_d, cmd->v_l_d}, sim_.time());
  return std::nullopt;
}

void TeleopSession::tick() {
  if (faulted_) return;
  try {
    last_ = sim_.step();
  } catch (const std::exception& e) {
    faulted_ = true;
    sim_.teleop()->estop();
    warnings_.push_back(fmt::format("simulation fault: {}", e.what()));
  }
}

TelemetryFrame TeleopSession::snapshot() const {
  TelemetryFrame f;
  f.seq = seq_++;
  f.t_sim = last_.t;
  f.reference = {last_.v_rd, last_.v_ld};
  f.measured = {last_.v_r, last_.v_l};
  f.error = {last_.e_r, last_.e_l};
  f.control = {last_.u_r, last_.u_l};
  f.phi_hat = {last_.phi_hat_r, last_.phi_hat_l};
  f.phi_norm = {last_.phi_norm_r, last_.phi_norm_l};
  f.slip = {last_.s_r, last_.s_l};
  f.pose = {last_.x, last_.y, last_.theta};
  f.terrain = sim_.terrain().name;
  f.warnings = sim_.warnings();
  f.warnings.insert(f.warnings.end(), warnings_.begin(), warnings_.end());
  const TeleopReference& ref = *sim_.teleop();
  f.estop = ref.estopped();
  f.watchdog = ref.watchdog_active();
  return f;
}

std::uint64_t TeleopSession::dropped_commands() const {
  return sim_.teleop()->dropped();
}

}  // namespace skidsim::teleop
