#include "skidsim/engine.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skidsim/errors.hpp"
#include "skidsim/integrators.hpp"

namespace skidsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string profile_key(const ReferenceProfile& profile) {
  return std::visit(
      Overloaded{
          [](const StepProfile& p) {
            return fmt::format("step({},{},{})", p.v_right, p.v_left, p.t_step);
          },
          [](const RampHoldProfile& p) {
            return fmt::format("ramp-hold({},{},{},{})", p.v_right, p.v_left, p.t_start,
                               p.duration);
          },
          [](const CurvedPathProfile& p) {
            return fmt::format("curved-path({},{},{})", p.v_right, p.v_left, p.ramp_time);
          },
          [](const PivotProfile& p) { return fmt::format("pivot({})", p.magnitude); },
          [](const StationaryProfile&) { return std::string("stationary"); },
          [](const TeleopProfile&) { return std::string("teleop"); },
      },
      profile);
}

RbfNetwork side_network(const std::optional<std::vector<Vec2>>& explicit_centers,
                        const RbfConfig& rbf, Rng& rng) {
  if (explicit_centers) return RbfNetwork(*explicit_centers, rbf.width);
  return init_centers(rbf.neurons, rbf.width, rbf.center_scale, rng);
}

}  // namespace

std::string_view controller_kind_name(ControllerKind kind) {
  return kind == ControllerKind::kNnrmfc ? "nnrmfc" : "pid";
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be > 0");
  if (!(dt_plant > 0.0)) throw ConfigError("dt_plant must be > 0");
  if (!(controller_rate > 0.0)) throw ConfigError("controller_rate must be > 0");
  const double ratio = 1.0 / (controller_rate * dt_plant);
  if (std::abs(ratio - std::round(ratio)) > 1e-6 || std::round(ratio) < 1.0) {
    throw ConfigError("controller period must be an integer multiple of dt_plant");
  }
  plant.validate();
  terrain.validate();
  validate_profile(profile);
  if (!initial_velocity.allFinite()) throw ConfigError("initial_velocity must be finite");
  if (controller.kind == ControllerKind::kNnrmfc) {
    controller.gains.validate();
    if (controller.rbf.neurons < 1) throw ConfigError("rbf.neurons must be >= 1");
    if (!(controller.rbf.width > 0.0)) throw ConfigError("rbf.width must be > 0");
    if (!(controller.rbf.center_scale > 0.0)) throw ConfigError("rbf.center_scale must be > 0");
    if (!(controller.phi_hat_clamp > 0.0)) throw ConfigError("phi_hat_clamp must be > 0");
    if (!std::isfinite(controller.phi_hat0)) throw ConfigError("phi_hat0 must be finite");
    for (const auto* centers : {&controller.rbf.centers_right, &controller.rbf.centers_left}) {
      if (*centers && (*centers)->empty()) throw ConfigError("rbf centers list must not be empty");
    }
  } else {
    controller.pid.validate();
  }
  if (teleop_max_accel && !(*teleop_max_accel > 0.0)) {
    throw ConfigError("teleop max_accel must be > 0");
  }
}

int ScenarioConfig::plant_steps_per_tick() const {
  return static_cast<int>(std::lround(1.0 / (controller_rate * dt_plant)));
}

double ScenarioConfig::controller_period() const {
  return plant_steps_per_tick() * dt_plant;
}

void apply_preset(ControllerConfig& controller, const NnPreset& preset) {
  controller.preset = preset.name;
  controller.gains = preset.gains;
  controller.rbf.neurons = preset.neurons;
  controller.rbf.width = preset.width;
}

double wrap_angle(double theta) {
  double wrapped = std::remainder(theta, 2.0 * std::numbers::pi);
  if (wrapped <= -std::numbers::pi) wrapped += 2.0 * std::numbers::pi;
  return wrapped;
}

Pose pose_update(const Pose& pose, double v_right, double v_left, double wheelbase, double dt) {
  const double v = 0.5 * (v_right + v_left);
  const double w = (v_right - v_left) / wheelbase;
  const double mid = pose.theta + 0.5 * w * dt;
  return Pose{pose.x + v * std::cos(mid) * dt, pose.y + v * std::sin(mid) * dt,
              wrap_angle(pose.theta + w * dt)};
}

std::array<double, 18> record_values(const TraceRecord& r) {
  return {r.t,         r.v_rd,      r.v_ld,       r.v_r,        r.v_l, r.e_r, r.e_l, r.u_r, r.u_l,
          r.phi_hat_r, r.phi_hat_l, r.phi_norm_r, r.phi_norm_l, r.s_r, r.s_l, r.x,   r.y,   r.theta};
}

TraceRecord record_from_values(const std::array<double, 18>& v) {
  return TraceRecord{v[0],  v[1],  v[2],  v[3],  v[4],  v[5],  v[6],  v[7],  v[8],
                     v[9],  v[10], v[11], v[12], v[13], v[14], v[15], v[16], v[17]};
}

PairController make_controller(const ScenarioConfig& config) {
  const ControllerConfig& c = config.controller;
  if (c.kind == ControllerKind::kPid) return PidPair(c.pid);
  Rng rng(config.rbf_seed());
  // Right side is drawn first.
  RbfNetwork right = side_network(c.rbf.centers_right, c.rbf, rng);
  RbfNetwork left = side_network(c.rbf.centers_left, c.rbf, rng);
  return NnrmfcPair(std::move(right), std::move(left), c.gains, c.phi_hat0, c.phi_hat_clamp);
}

std::string scenario_key(const ScenarioConfig& config) {
  const TerrainModel& t = config.terrain;
  const PlantParams& p = config.plant;
  return fmt::format(
      "terrain={}[{},{}|{},{}|{},{}|{},{},{}];profile={};plant=[{},{},{},{},{},{},{}];"
      "v0=[{},{}];duration={};dt={};rate={};seed={}",
      t.name, t.slip_left.lo, t.slip_left.hi, t.slip_right.lo, t.slip_right.hi,
      t.resample_period, t.smoothing_tau, t.disturbance.amplitude, t.disturbance.frequency,
      t.disturbance.bias, profile_key(config.profile), p.g_right, p.g_left, p.c_visc, p.c_quad,
      p.c_couple, p.wheel_radius, p.wheelbase, config.initial_velocity.x(),
      config.initial_velocity.y(), config.duration, config.dt_plant, config.controller_rate,
      config.seed);
}

namespace {

const ScenarioConfig& validated(const ScenarioConfig& config) {
  config.validate();
  return config;
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& config)
    : config_(validated(config)),
      rng_(config.seed),
      controller_(make_controller(config)),
      period_(config.controller_period()),
      substeps_(config.plant_steps_per_tick()) {
  plant_ = initial_plant_state(config_.terrain, rng_, config_.initial_velocity.x(),
                               config_.initial_velocity.y());
  if (std::holds_alternative<TeleopProfile>(config_.profile)) {
    TeleopReferenceOptions options;
    options.max_accel = config_.teleop_max_accel;
    teleop_ = std::make_unique<TeleopReference>(options);
  }
  if (config_.controller.kind == ControllerKind::kNnrmfc) {
    // Proportional part of the law alone; past 2 the held control overshoots
    // more each tick.
    const double g = std::max(config_.plant.g_right, config_.plant.g_left);
    const double loop_gain = g * 0.5 * (config_.controller.gains.gamma + 2.0) * period_;
    if (loop_gain >= 2.0) {
      warnings_.push_back(fmt::format(
          "sampled loop gain g(gamma + 2)/2 * T = {:.3f} >= 2: the controller rate is too low "
          "for this plant and gain set",
          loop_gain));
    }
  }
}

void Simulation::set_terrain(TerrainModel terrain) {
  terrain.validate();
  config_.terrain = std::move(terrain);
}

ReferenceSample Simulation::reference(double t) {
  if (teleop_) return teleop_->sample(t);
  return reference_at(config_.profile, t);
}

TraceRecord Simulation::step() {
  const double t = time();
  const ReferenceSample ref = reference(t);
  Measurement m;
  m.velocity = Vec2(plant_.v_right, plant_.v_left);
  m.reference = Vec2(ref.v_right, ref.v_left);
  m.reference_rate = Vec2(ref.rate_right, ref.rate_left);
  const ControlPair control = update_controller(controller_, m, period_);

  if (control.clamped) {
    for (int i = 0; i < 2; ++i) {
      if (std::abs(control.phi_hat[i]) >= config_.controller.phi_hat_clamp && !clamp_warned_[i]) {
        clamp_warned_[i] = true;
        warnings_.push_back(fmt::format("phi_hat_{} hit the safety clamp ({}) at t = {:.3f} s",
                                        i == 0 ? "r" : "l", config_.controller.phi_hat_clamp, t));
      }
    }
  }

  TraceRecord r;
  r.t = t;
  r.v_rd = ref.v_right;
  r.v_ld = ref.v_left;
  r.v_r = plant_.v_right;
  r.v_l = plant_.v_left;
  r.e_r = plant_.v_right - ref.v_right;
  r.e_l = plant_.v_left - ref.v_left;
  r.u_r = control.u.x();
  r.u_l = control.u.y();
  r.phi_hat_r = control.phi_hat.x();
  r.phi_hat_l = control.phi_hat.y();
  r.phi_norm_r = control.basis_norm.x();
  r.phi_norm_l = control.basis_norm.y();
  r.s_r = plant_.s_right;
  r.s_l = plant_.s_left;
  r.x = pose_.x;
  r.y = pose_.y;
  r.theta = pose_.theta;

  integrate(control.u);
  ++tick_;
  return r;
}

void Simulation::integrate(const Vec2& u) {
  const double t0 = time();
  const double h = config_.dt_plant;
  for (int j = 0; j < substeps_; ++j) {
    const double t = t0 + j * h;
    plant_.t = t;
    // Slip is held across the RK4 stages; it advances on the plant clock.
    const auto f = [&](double tau, const Vec2& v) {
      PlantState stage = plant_;
      stage.t = tau;
      stage.v_right = v.x();
      stage.v_left = v.y();
      const SideAccel a = plant_derivative(stage, u.x(), u.y(), config_.plant, config_.terrain);
      return Vec2(a.right, a.left);
    };
    const Vec2 v0(plant_.v_right, plant_.v_left);
    const Vec2 v1 = rk4_step(f, t, v0, h);
    if (!v1.allFinite()) throw IntegrationFault(fmt::format("plant diverged at t = {}", t));

    pose_ = pose_update(pose_, 0.5 * (v0.x() + v1.x()), 0.5 * (v0.y() + v1.y()),
                        config_.plant.wheelbase, h);
    plant_ = advance_slip(plant_, config_.terrain, h, rng_);
    plant_.v_right = v1.x();
    plant_.v_left = v1.y();
    plant_.t = t0 + (j + 1) * h;
    if (observer_) observer_(plant_, u);
  }
}

TraceMeta Simulation::make_meta() const {
  TraceMeta meta;
  meta.scenario_id = config_.id;
  meta.terrain = config_.terrain.name;
  meta.controller = std::string(controller_kind_name(config_.controller.kind));
  meta.preset = config_.controller.kind == ControllerKind::kNnrmfc ? config_.controller.preset
                                                                   : std::string("pid-baseline");
  meta.profile = profile_name(config_.profile);
  meta.seed = config_.seed;
  meta.rbf_seed = config_.rbf_seed();
  meta.sample_period = period_;
  meta.dt_plant = config_.dt_plant;
  meta.scenario_key = scenario_key(config_);
  meta.warnings = warnings_;
  meta.g_right = config_.plant.g_right;
  meta.g_left = config_.plant.g_left;
  if (const auto* nn = std::get_if<NnrmfcPair>(&controller_)) {
    meta.centers_right = nn->network(0).centers();
    meta.centers_left = nn->network(1).centers();
  }
  return meta;
}

SimTrace run_scenario(const ScenarioConfig& config) {
  if (std::holds_alternative<TeleopProfile>(config.profile)) {
    throw ConfigError("teleop profiles run under the teleop server, not in batch mode");
  }
  Simulation sim(config);
  SimTrace trace;
  const auto ticks = static_cast<std::size_t>(std::llround(config.duration / sim.period()));
  trace.records.reserve(ticks);
  try {
    for (std::size_t k = 0; k < ticks; ++k) trace.records.push_back(sim.step());
  } catch (const IntegrationFault& fault) {
    trace.meta.faulted = true;
    trace.meta.fault_message = fault.what();
  } catch (const std::domain_error& fault) {
    trace.meta.faulted = true;
    trace.meta.fault_message = fault.what();
  }
  const bool faulted = trace.meta.faulted;
  const std::string message = trace.meta.fault_message;
  trace.meta = sim.make_meta();
  trace.meta.faulted = faulted;
  trace.meta.fault_message = message;
  if (faulted && !trace.records.empty()) trace.meta.last_valid_index = trace.records.size() - 1;
  trace.final_plant = sim.plant();
  trace.final_pose = sim.pose();
  return trace;
}

}  // namespace skidsim
