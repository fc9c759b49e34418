#pragma once

namespace skidsim {

// Classical fourth-order Runge-Kutta step for dx/dt = f(t, x). State needs
// vector-space arithmetic (Eigen types work).
template <class State, class Derivative>
State rk4_step(const Derivative& f, double t, const State& x, double h) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * h, State(x + (0.5 * h) * k1));
  const State k3 = f(t + 0.5 * h, State(x + (0.5 * h) * k2));
  const State k4 = f(t + h, State(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace skidsim
