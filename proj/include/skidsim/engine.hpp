#pragma once

// Fixed-step closed-loop simulation: RK4 plant at dt_plant, controller
// updated at its own rate with the control held in between, trace recorded
// at the controller rate.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skidsim/controller.hpp"
#include "skidsim/dynamics.hpp"
#include "skidsim/reference.hpp"

namespace skidsim {

enum class ControllerKind { kNnrmfc, kPid };

std::string_view controller_kind_name(ControllerKind kind);

struct RbfConfig {
  int neurons = 9;
  double width = 0.13;
  double center_scale = 1.0;
  // Defaults to the scenario seed.
  std::optional<std::uint64_t> seed;
  // Explicit centers override the random draw (one list per side).
  std::optional<std::vector<Vec2>> centers_right;
  std::optional<std::vector<Vec2>> centers_left;
};

struct ControllerConfig {
  ControllerKind kind = ControllerKind::kNnrmfc;
  std::string preset = "sim-paper";
  NnGains gains = sim_paper_preset().gains;
  RbfConfig rbf;
  double phi_hat0 = kDefaultPhiHat0;
  double phi_hat_clamp = kDefaultPhiHatClamp;
  PidGains pid;
};

struct ScenarioConfig {
  std::string id = "scenario";
  TerrainModel terrain = builtin_terrains().front();
  ControllerConfig controller;
  ReferenceProfile profile = CurvedPathProfile{};
  PlantParams plant;
  Vec2 initial_velocity = Vec2::Zero();
  double duration = 200.0;
  double dt_plant = 1e-3;
  double controller_rate = 100.0;
  std::uint64_t seed = 1;
  // Teleop only: slew limit handed to the TeleopReference.
  std::optional<double> teleop_max_accel;

  // Throws ConfigError.
  void validate() const;
  int plant_steps_per_tick() const;
  double controller_period() const;
  std::uint64_t rbf_seed() const { return controller.rbf.seed.value_or(seed); }
};

// Applies a named preset (gains, neuron count, width) to a controller config.
void apply_preset(ControllerConfig& controller, const NnPreset& preset);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Wraps to (-pi, pi].
double wrap_angle(double theta);

// Differential-drive kinematics, midpoint rule:
// v = (V_R + V_L) / 2, w = (V_R - V_L) / W.
Pose pose_update(const Pose& pose, double v_right, double v_left, double wheelbase, double dt);

struct TraceRecord {
  double t = 0.0;
  double v_rd = 0.0, v_ld = 0.0;
  double v_r = 0.0, v_l = 0.0;
  double e_r = 0.0, e_l = 0.0;
  double u_r = 0.0, u_l = 0.0;
  double phi_hat_r = 0.0, phi_hat_l = 0.0;
  double phi_norm_r = 0.0, phi_norm_l = 0.0;
  double s_r = 0.0, s_l = 0.0;
  double x = 0.0, y = 0.0, theta = 0.0;
};

inline constexpr std::array<std::string_view, 18> kTraceColumns = {
    "t",         "v_rd",      "v_ld",       "v_r",        "v_l", "e_r", "e_l", "u_r", "u_l",
    "phi_hat_r", "phi_hat_l", "phi_norm_r", "phi_norm_l", "s_r", "s_l", "x",   "y",   "theta"};

std::array<double, 18> record_values(const TraceRecord& r);
TraceRecord record_from_values(const std::array<double, 18>& v);

struct TraceMeta {
  std::string scenario_id;
  std::string terrain;
  std::string controller;  // "nnrmfc" or "pid"
  std::string preset;
  std::string profile;
  std::uint64_t seed = 0;
  std::uint64_t rbf_seed = 0;
  double sample_period = 0.0;
  double dt_plant = 0.0;
  // Everything but the controller, so traces of different controllers on the
  // same scenario can be matched.
  std::string scenario_key;
  std::vector<std::string> warnings;
  bool faulted = false;
  std::optional<std::size_t> last_valid_index;
  std::string fault_message;
  std::vector<Vec2> centers_right;
  std::vector<Vec2> centers_left;
  double g_right = 0.0;
  double g_left = 0.0;
};

struct SimTrace {
  TraceMeta meta;
  std::vector<TraceRecord> records;
  PlantState final_plant;
  Pose final_pose;
};

// Observes every plant step: time at the end of the step, state, and the
// control held over it.
using PlantObserver = std::function<void(const PlantState&, const Vec2& u)>;

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config);

  // Measures, updates the controller, records, then integrates the plant over
  // one controller period. Throws IntegrationFault (or std::domain_error from
  // the controller) on non-finite values.
  TraceRecord step();

  double time() const { return static_cast<double>(tick_) * period_; }
  std::uint64_t tick() const { return tick_; }
  double period() const { return period_; }
  const PlantState& plant() const { return plant_; }
  const Pose& pose() const { return pose_; }
  const TerrainModel& terrain() const { return config_.terrain; }
  const ScenarioConfig& config() const { return config_; }
  const PairController& controller() const { return controller_; }

  // Takes effect at the next scheduled resample.
  void set_terrain(TerrainModel terrain);

  // Non-null when the profile is TeleopProfile.
  TeleopReference* teleop() { return teleop_.get(); }
  const TeleopReference* teleop() const { return teleop_.get(); }

  void set_plant_observer(PlantObserver observer) { observer_ = std::move(observer); }

  const std::vector<std::string>& warnings() const { return warnings_; }
  TraceMeta make_meta() const;

 private:
  ReferenceSample reference(double t);
  void integrate(const Vec2& u);

  ScenarioConfig config_;
  Rng rng_;
  PlantState plant_;
  Pose pose_;
  PairController controller_;
  std::unique_ptr<TeleopReference> teleop_;
  PlantObserver observer_;
  double period_;
  int substeps_;
  std::uint64_t tick_ = 0;
  bool clamp_warned_[2] = {false, false};
  std::vector<std::string> warnings_;
};

// Builds the controller a scenario asks for (centers drawn from rbf_seed).
PairController make_controller(const ScenarioConfig& config);

// Stable textual key of everything except the controller section.
std::string scenario_key(const ScenarioConfig& config);

// Runs a closed-form scenario for round(duration / period) controller ticks.
// Faults are reported in the trace metadata, not thrown.
SimTrace run_scenario(const ScenarioConfig& config);

}  // namespace skidsim
