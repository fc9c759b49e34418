#pragma once

// Per-side tracking controllers. Both see only the measured side
// velocities and the reference; nothing from dynamics.hpp is reachable from
// here.

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "skidsim/rbfnn.hpp"

namespace skidsim {

struct NnGains {
  double kappa = 1.2;
  double epsilon = 0.04;
  double sigma = 11.5;
  double gamma = 1.6;

  // All four must be strictly positive; throws ConfigError otherwise.
  void validate() const;
};

struct NnPreset {
  std::string name;
  NnGains gains;
  int neurons = 9;
  double width = 0.13;
};

// "sim-paper": kappa 1.2, epsilon 0.04, sigma 11.5, gamma 1.6, L 9, width 0.13.
// "field-paper": kappa 1.9, epsilon 0.08, sigma 17.1, gamma 3.6, L 8, width 0.15.
const NnPreset& sim_paper_preset();
const NnPreset& field_paper_preset();
std::optional<NnPreset> find_preset(std::string_view name);

inline constexpr double kDefaultPhiHat0 = 0.1;
inline constexpr double kDefaultPhiHatClamp = 100.0;

// U = -gamma e / 2 - e (|Phi|^2 + 2 + Vdot_d^2) / 2 - sigma e |Phi| phi^2
double nnrmfc_control(double e, double basis_norm, double vdot_ref, double phi_hat,
                      const NnGains& gains);

// d(phi)/dt = -kappa phi - epsilon phi^3 + sigma e^2 |Phi| phi
double adaptive_derivative(double phi_hat, double e, double basis_norm, const NnGains& gains);

struct AdaptiveStep {
  double phi_hat = 0.0;
  int substeps = 1;
  bool clamped = false;
};

// Explicit Euler over dt with e and |Phi| frozen. The step is split into
// 2^k substeps so that epsilon * phi^2 * h <= 0.5 on every substep; the
// result is clamped to [-clamp, clamp].
AdaptiveStep advance_adaptive(double phi_hat, double e, double basis_norm, const NnGains& gains,
                              double dt, double clamp = kDefaultPhiHatClamp);

struct NnrmfcState {
  double phi_hat = kDefaultPhiHat0;
};

struct NnrmfcOutput {
  double u = 0.0;
  double basis_norm = 0.0;
  NnrmfcState next;
  bool clamped = false;
};

// Basis at v, control from the pre-update phi_hat, then one adaptive step.
NnrmfcOutput controller_step(const NnrmfcState& state, const RbfNetwork& net, const NnGains& gains,
                             double e, const Vec2& v, double vdot_ref, double dt,
                             double clamp = kDefaultPhiHatClamp);

// Documented baseline loop gains 4 / 2 / 0.1, referred to the default plant
// gain of 60 effort-to-acceleration.
struct PidGains {
  double kp = 4.0 / 60.0;
  double ki = 2.0 / 60.0;
  double kd = 0.1 / 60.0;
  double integral_clamp = 2.0;   // bound on the integral state, m
  double derivative_tau = 0.02;  // first-order derivative filter, s

  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double derivative = 0.0;
  double prev_error = 0.0;
  bool primed = false;
};

struct PidOutput {
  double u = 0.0;
  PidState next;
};

// Positional PID acting on -e. The first call has no derivative history and
// contributes no derivative term.
PidOutput pid_step(const PidState& state, const PidGains& gains, double e, double dt);

// Everything a pair controller observes at one tick.
struct Measurement {
  Vec2 velocity = Vec2::Zero();        // measured (right, left), m/s
  Vec2 reference = Vec2::Zero();       // commanded (right, left), m/s
  Vec2 reference_rate = Vec2::Zero();  // commanded rate, m/s^2
};

struct ControlPair {
  Vec2 u = Vec2::Zero();
  Vec2 phi_hat = Vec2::Zero();
  Vec2 basis_norm = Vec2::Zero();
  bool clamped = false;
};

class NnrmfcPair {
 public:
  NnrmfcPair(RbfNetwork right, RbfNetwork left, NnGains gains, double phi_hat0 = kDefaultPhiHat0,
             double clamp = kDefaultPhiHatClamp);

  ControlPair update(const Measurement& m, double dt);

  const RbfNetwork& network(int side) const { return side == 0 ? right_ : left_; }
  const NnGains& gains() const { return gains_; }
  Vec2 phi_hat() const { return {state_[0].phi_hat, state_[1].phi_hat}; }

 private:
  RbfNetwork right_;
  RbfNetwork left_;
  NnGains gains_;
  double clamp_;
  NnrmfcState state_[2];
};

class PidPair {
 public:
  explicit PidPair(PidGains gains);

  ControlPair update(const Measurement& m, double dt);

  const PidGains& gains() const { return gains_; }

 private:
  PidGains gains_;
  PidState state_[2];
};

using PairController = std::variant<NnrmfcPair, PidPair>;

ControlPair update_controller(PairController& controller, const Measurement& m, double dt);

}  // namespace skidsim
