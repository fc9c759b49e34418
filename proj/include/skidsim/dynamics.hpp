#pragma once

// Ground-truth plant: per-side longitudinal dynamics of a skid-steering
// robot with a terrain-dependent slip disturbance.
//
//   dV_i/dt = g_i U_i + d_i(V) + Delta_i(t),   Delta_i = -(1 + s_i) F(t)
//
// The controllers never see anything declared here.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skidsim/random.hpp"

namespace skidsim {

enum class Side { kRight = 0, kLeft = 1 };

std::string_view side_name(Side side);

struct PlantParams {
  // Control effectiveness (acceleration per unit of normalized effort).
  double g_right = 60.0;
  double g_left = 60.0;
  double c_visc = 0.8;     // s^-1
  double c_quad = 0.25;    // m^-1
  double c_couple = 0.1;   // s^-1
  double wheel_radius = 0.5;  // m
  double wheelbase = 1.85;    // m

  // Throws ConfigError naming the offending field.
  void validate() const;
  double gain(Side side) const { return side == Side::kRight ? g_right : g_left; }
};

// F(t) = amplitude * sin(2 pi frequency t) + bias, m/s^2.
struct NominalDisturbance {
  double amplitude = 0.2;
  double frequency = 0.08;
  double bias = 0.1;

  double at(double t) const;
  static NominalDisturbance none() { return {0.0, 0.0, 0.0}; }
};

struct SlipInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct TerrainModel {
  std::string name;
  SlipInterval slip_left;
  SlipInterval slip_right;
  double resample_period = 2.0;  // s
  double smoothing_tau = 0.3;    // s; 0 jumps straight to the target
  NominalDisturbance disturbance;

  const SlipInterval& interval(Side side) const {
    return side == Side::kRight ? slip_right : slip_left;
  }
  void validate() const;
};

// The five surfaces of the slip-range table, ordered dry asphalt, wet
// asphalt, gravel, mud, ice.
const std::vector<TerrainModel>& builtin_terrains();

// Case-, space-, '-' and '_'-insensitive lookup ("dry_asphalt" == "Dry asphalt").
std::optional<TerrainModel> find_builtin_terrain(std::string_view name);

// Zero slip everywhere; nominal disturbance left at its defaults.
TerrainModel no_slip_terrain();

struct PlantState {
  double v_right = 0.0;
  double v_left = 0.0;
  double s_right = 0.0;
  double s_left = 0.0;
  double s_target_right = 0.0;
  double s_target_left = 0.0;
  double t = 0.0;
  double next_resample_t = 0.0;
  std::uint64_t resample_count = 0;
};

struct SideAccel {
  double right = 0.0;
  double left = 0.0;
};

// (omega_theoretical - omega_actual) / max(|omega_theoretical|, |omega_actual|).
// Both zero -> 0. Opposite signs -> DomainError. Reverse motion uses
// magnitudes, so a wheel spinning faster than the ground gives s > 0 in
// either direction.
double slip_ratio(double omega_theoretical, double omega_actual);

// 1 + s for |s| < 1, DomainError otherwise.
double slip_multiplier(double s);

// Hidden actuation model d_i(V): drag plus cross-side coupling.
double actuation_model(double v_self, double v_other, const PlantParams& params);

SideAccel plant_derivative(const PlantState& state, double u_right, double u_left,
                           const PlantParams& params, const TerrainModel& terrain);

template <Uniform64Generator G>
double resample_slip(const TerrainModel& terrain, Side side, G& rng) {
  const SlipInterval& iv = terrain.interval(side);
  return uniform(rng, iv.lo, iv.hi);
}

// Draws the first slip targets (t = 0 counts as a resample event) and starts
// the smoothed slip at those targets.
template <Uniform64Generator G>
PlantState initial_plant_state(const TerrainModel& terrain, G& rng, double v_right = 0.0,
                               double v_left = 0.0) {
  PlantState state;
  state.v_right = v_right;
  state.v_left = v_left;
  state.s_target_right = resample_slip(terrain, Side::kRight, rng);
  state.s_target_left = resample_slip(terrain, Side::kLeft, rng);
  state.s_right = state.s_target_right;
  state.s_left = state.s_target_left;
  state.resample_count = 1;
  state.next_resample_t = terrain.resample_period;
  return state;
}

// First-order relaxation of s toward its target over dt, exact for a held
// target.
double relax_slip(double s, double target, double dt, double tau);

// Advances t by dt: resamples targets whenever t crosses a resample instant,
// then relaxes s toward the targets.
template <Uniform64Generator G>
PlantState advance_slip(PlantState state, const TerrainModel& terrain, double dt, G& rng) {
  // Resample instants are k * period; compare with a tolerance so that
  // accumulated dt roundoff cannot skip or double an event.
  constexpr double kTimeEps = 1e-9;
  while (state.t + kTimeEps >= state.next_resample_t) {
    state.s_target_right = resample_slip(terrain, Side::kRight, rng);
    state.s_target_left = resample_slip(terrain, Side::kLeft, rng);
    ++state.resample_count;
    state.next_resample_t =
        static_cast<double>(state.resample_count) * terrain.resample_period;
  }
  state.s_right = relax_slip(state.s_right, state.s_target_right, dt, terrain.smoothing_tau);
  state.s_left = relax_slip(state.s_left, state.s_target_left, dt, terrain.smoothing_tau);
  state.t += dt;
  return state;
}

}  // namespace skidsim
