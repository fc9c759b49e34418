#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skidsim/random.hpp"

namespace skidsim {

using Vec2 = Eigen::Vector2d;

// Gaussian radial-basis feature map over the side-velocity pair:
//
//   Phi_k(V) = exp(-|V - c_k|^2 / w_k^2),  k = 1..L
//
// Centers and widths are fixed at construction; only the controller's
// adaptive scalar evolves online.
class RbfNetwork {
 public:
  // Throws std::invalid_argument on empty, mismatched, non-finite or
  // non-positive-width input.
  RbfNetwork(std::vector<Vec2> centers, std::vector<double> widths);

  // All neurons share one width.
  RbfNetwork(std::vector<Vec2> centers, double width);

  int size() const { return static_cast<int>(centers_.size()); }
  const std::vector<Vec2>& centers() const { return centers_; }
  const std::vector<double>& widths() const { return widths_; }

  // Each component lies in (0, 1].
  Eigen::VectorXd activations(const Vec2& v) const;

  // Euclidean norm of activations(v); bounded by sqrt(L).
  double activation_norm(const Vec2& v) const;

  // Row k is d Phi_k / dV = -2 (V - c_k) / w_k^2 * Phi_k.
  Eigen::Matrix<double, Eigen::Dynamic, 2> jacobian(const Vec2& v) const;

 private:
  std::vector<Vec2> centers_;
  std::vector<double> widths_;
};

// Centers uniform on [-scale, scale]^2 as (2 rand - 1) * scale per
// coordinate, x drawn before y.
template <Uniform64Generator G>
RbfNetwork init_centers(int neurons, double width, double scale, G& rng) {
  if (neurons < 1) throw std::invalid_argument("init_centers: neuron count must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("init_centers: scale must be > 0");
  std::vector<Vec2> centers;
  centers.reserve(static_cast<std::size_t>(neurons));
  for (int k = 0; k < neurons; ++k) {
    const double x = (2.0 * uniform01(rng) - 1.0) * scale;
    const double y = (2.0 * uniform01(rng) - 1.0) * scale;
    centers.emplace_back(x, y);
  }
  return RbfNetwork(std::move(centers), width);
}

}  // namespace skidsim
