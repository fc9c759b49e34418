#include "skidsim/controller.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "skidsim/errors.hpp"

namespace skidsim {

namespace {

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

void NnGains::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("controller gain kappa must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("controller gain epsilon must be > 0");
  if (!(sigma > 0.0)) throw ConfigError("controller gain sigma must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("controller gain gamma must be > 0");
  if (!all_finite({kappa, epsilon, sigma, gamma})) {
    throw ConfigError("controller gains must be finite");
  }
}

const NnPreset& sim_paper_preset() {
  static const NnPreset preset{"sim-paper", NnGains{1.2, 0.04, 11.5, 1.6}, 9, 0.13};
  return preset;
}

const NnPreset& field_paper_preset() {
  static const NnPreset preset{"field-paper", NnGains{1.9, 0.08, 17.1, 3.6}, 8, 0.15};
  return preset;
}

std::optional<NnPreset> find_preset(std::string_view name) {
  const std::string key = lower(name);
  if (key == sim_paper_preset().name) return sim_paper_preset();
  if (key == field_paper_preset().name) return field_paper_preset();
  return std::nullopt;
}

double nnrmfc_control(double e, double basis_norm, double vdot_ref, double phi_hat,
                      const NnGains& gains) {
  if (!all_finite({e, basis_norm, vdot_ref, phi_hat})) {
    throw std::domain_error("nnrmfc_control: non-finite input");
  }
  return -0.5 * gains.gamma * e -
         0.5 * e * (basis_norm * basis_norm + 2.0 + vdot_ref * vdot_ref) -
         gains.sigma * e * basis_norm * phi_hat * phi_hat;
}

double adaptive_derivative(double phi_hat, double e, double basis_norm, const NnGains& gains) {
  return -gains.kappa * phi_hat - gains.epsilon * phi_hat * phi_hat * phi_hat +
         gains.sigma * e * e * basis_norm * phi_hat;
}

AdaptiveStep advance_adaptive(double phi_hat, double e, double basis_norm, const NnGains& gains,
                              double dt, double clamp) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance_adaptive: dt must be > 0");
  if (!all_finite({phi_hat, e, basis_norm})) {
    throw std::domain_error("advance_adaptive: non-finite input");
  }
  AdaptiveStep out;
  out.substeps = 0;
  double phi = phi_hat;
  double remaining = dt;
  while (remaining > 0.0) {
    // Guard on the cubic damping term, re-evaluated as phi moves.
    double h = remaining;
    while (gains.epsilon * phi * phi * h > 0.5) h *= 0.5;
    phi += h * adaptive_derivative(phi, e, basis_norm, gains);
    remaining = (h == remaining) ? 0.0 : remaining - h;
    ++out.substeps;
    if (std::abs(phi) > clamp) {
      phi = std::copysign(clamp, phi);
      out.clamped = true;
    }
  }
  out.phi_hat = phi;
  return out;
}

NnrmfcOutput controller_step(const NnrmfcState& state, const RbfNetwork& net, const NnGains& gains,
                             double e, const Vec2& v, double vdot_ref, double dt, double clamp) {
  NnrmfcOutput out;
  out.basis_norm = net.activation_norm(v);
  out.u = nnrmfc_control(e, out.basis_norm, vdot_ref, state.phi_hat, gains);
  const AdaptiveStep step = advance_adaptive(state.phi_hat, e, out.basis_norm, gains, dt, clamp);
  out.next.phi_hat = step.phi_hat;
  out.clamped = step.clamped;
  return out;
}

void PidGains::validate() const {
  if (kp < 0.0 || ki < 0.0 || kd < 0.0) throw ConfigError("PID gains must be >= 0");
  if (!(integral_clamp > 0.0)) throw ConfigError("PID integral_clamp must be > 0");
  if (derivative_tau < 0.0) throw ConfigError("PID derivative_tau must be >= 0");
}

PidOutput pid_step(const PidState& state, const PidGains& gains, double e, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be > 0");
  PidOutput out;
  PidState& next = out.next;
  next.integral = std::clamp(state.integral + e * dt, -gains.integral_clamp, gains.integral_clamp);
  if (state.primed) {
    const double raw = (e - state.prev_error) / dt;
    const double blend = dt / (gains.derivative_tau + dt);
    next.derivative = state.derivative + blend * (raw - state.derivative);
  } else {
    next.derivative = 0.0;
  }
  next.prev_error = e;
  next.primed = true;
  out.u = -(gains.kp * e + gains.ki * next.integral + gains.kd * next.derivative);
  return out;
}

NnrmfcPair::NnrmfcPair(RbfNetwork right, RbfNetwork left, NnGains gains, double phi_hat0,
                       double clamp)
    : right_(std::move(right)), left_(std::move(left)), gains_(gains), clamp_(clamp) {
  gains_.validate();
  if (!std::isfinite(phi_hat0)) throw ConfigError("phi_hat0 must be finite");
  if (!(clamp > 0.0)) throw ConfigError("phi_hat clamp must be > 0");
  state_[0].phi_hat = phi_hat0;
  state_[1].phi_hat = phi_hat0;
}

ControlPair NnrmfcPair::update(const Measurement& m, double dt) {
  ControlPair out;
  const Vec2 e = m.velocity - m.reference;
  for (int i = 0; i < 2; ++i) {
    const NnrmfcOutput step = controller_step(state_[i], network(i), gains_, e[i], m.velocity,
                                              m.reference_rate[i], dt, clamp_);
    out.u[i] = step.u;
    out.basis_norm[i] = step.basis_norm;
    out.phi_hat[i] = step.next.phi_hat;
    out.clamped = out.clamped || step.clamped;
    state_[i] = step.next;
  }
  return out;
}

PidPair::PidPair(PidGains gains) : gains_(gains) { gains_.validate(); }

ControlPair PidPair::update(const Measurement& m, double dt) {
  ControlPair out;
  const Vec2 e = m.velocity - m.reference;
  for (int i = 0; i < 2; ++i) {
    const PidOutput step = pid_step(state_[i], gains_, e[i], dt);
    out.u[i] = step.u;
    state_[i] = step.next;
  }
  return out;
}

ControlPair update_controller(PairController& controller, const Measurement& m, double dt) {
  return std::visit([&](auto& c) { return c.update(m, dt); }, controller);
}

}  // namespace skidsim
