#include "skidsim/dynamics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "skidsim/errors.hpp"

namespace skidsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::string normalize_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void validate_interval(const SlipInterval& iv, const std::string& label) {
  require(std::isfinite(iv.lo) && std::isfinite(iv.hi), label + ": slip bounds must be finite");
  require(iv.lo <= iv.hi, label + ": lower slip bound exceeds upper bound");
  require(iv.lo > -1.0 && iv.hi < 1.0, label + ": slip interval must lie inside (-1, 1)");
}

TerrainModel make_terrain(std::string name, SlipInterval left, SlipInterval right) {
  TerrainModel t;
  t.name = std::move(name);
  t.slip_left = left;
  t.slip_right = right;
  return t;
}

}  // namespace

std::string_view side_name(Side side) { return side == Side::kRight ? "right" : "left"; }

void PlantParams::validate() const {
  require(g_right > 0.0 && std::isfinite(g_right), "plant.g_right must be > 0");
  require(g_left > 0.0 && std::isfinite(g_left), "plant.g_left must be > 0");
  require(std::isfinite(c_visc) && std::isfinite(c_quad) && std::isfinite(c_couple),
          "plant drag coefficients must be finite");
  require(wheel_radius > 0.0, "plant.wheel_radius must be > 0");
  require(wheelbase > 0.0, "plant.wheelbase must be > 0");
}

double NominalDisturbance::at(double t) const {
  return amplitude * std::sin(2.0 * std::numbers::pi * frequency * t) + bias;
}

void TerrainModel::validate() const {
  validate_interval(slip_left, "terrain '" + name + "' left side");
  validate_interval(slip_right, "terrain '" + name + "' right side");
  require(resample_period > 0.0, "terrain '" + name + "': resample_period must be > 0");
  require(smoothing_tau >= 0.0, "terrain '" + name + "': smoothing_tau must be >= 0");
  require(std::isfinite(disturbance.amplitude) && std::isfinite(disturbance.frequency) &&
              std::isfinite(disturbance.bias),
          "terrain '" + name + "': disturbance parameters must be finite");
}

const std::vector<TerrainModel>& builtin_terrains() {
  static const std::vector<TerrainModel> terrains = {
      make_terrain("Dry asphalt", {0.05, 0.40}, {0.05, 0.20}),
      make_terrain("Wet asphalt", {0.05, 0.80}, {0.05, 0.50}),
      make_terrain("Gravel", {0.05, 0.50}, {0.05, 0.40}),
      make_terrain("Mud", {0.05, 0.70}, {0.05, 0.50}),
      make_terrain("Ice", {0.05, 0.90}, {0.05, 0.75}),
  };
  return terrains;
}

std::optional<TerrainModel> find_builtin_terrain(std::string_view name) {
  const std::string key = normalize_name(name);
  for (const auto& t : builtin_terrains()) {
    if (normalize_name(t.name) == key) return t;
  }
  return std::nullopt;
}

TerrainModel no_slip_terrain() { return make_terrain("No slip", {0.0, 0.0}, {0.0, 0.0}); }

double slip_ratio(double omega_theoretical, double omega_actual) {
  if (!std::isfinite(omega_theoretical) || !std::isfinite(omega_actual)) {
    throw DomainError("slip_ratio: non-finite angular velocity");
  }
  if (omega_theoretical == 0.0 && omega_actual == 0.0) return 0.0;
  if ((omega_theoretical > 0.0 && omega_actual < 0.0) ||
      (omega_theoretical < 0.0 && omega_actual > 0.0)) {
    throw DomainError("slip_ratio: wheel and ground speeds have opposite signs");
  }
  const double wheel = std::abs(omega_theoretical);
  const double ground = std::abs(omega_actual);
  return (wheel - ground) / std::max(wheel, ground);
}

double slip_multiplier(double s) {
  if (!(std::abs(s) < 1.0)) throw DomainError("slip_multiplier: |s| must be < 1");
  return 1.0 + s;
}

double actuation_model(double v_self, double v_other, const PlantParams& params) {
  return -params.c_visc * v_self - params.c_quad * v_self * std::abs(v_self) +
         params.c_couple * (v_other - v_self);
}

SideAccel plant_derivative(const PlantState& state, double u_right, double u_left,
                           const PlantParams& params, const TerrainModel& terrain) {
  if (!std::isfinite(state.v_right) || !std::isfinite(state.v_left) ||
      !std::isfinite(u_right) || !std::isfinite(u_left) || !std::isfinite(state.t)) {
    throw IntegrationFault("non-finite plant state or control input at t = " +
                           std::to_string(state.t));
  }
  const double f = terrain.disturbance.at(state.t);
  SideAccel a;
  a.right = params.g_right * u_right + actuation_model(state.v_right, state.v_left, params) -
            slip_multiplier(state.s_right) * f;
  a.left = params.g_left * u_left + actuation_model(state.v_left, state.v_right, params) -
           slip_multiplier(state.s_left) * f;
  return a;
}

double relax_slip(double s, double target, double dt, double tau) {
  if (tau <= 0.0) return target;
  return s + (1.0 - std::exp(-dt / tau)) * (target - s);
}

}  // namespace skidsim
