#include "skidsim/rbfnn.hpp"

#include <cmath>
#include <stdexcept>

namespace skidsim {

RbfNetwork::RbfNetwork(std::vector<Vec2> centers, std::vector<double> widths)
    : centers_(std::move(centers)), widths_(std::move(widths)) {
  if (centers_.empty()) throw std::invalid_argument("RbfNetwork: at least one neuron required");
  if (centers_.size() != widths_.size()) {
    throw std::invalid_argument("RbfNetwork: centers and widths differ in length");
  }
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    if (!centers_[k].allFinite()) throw std::invalid_argument("RbfNetwork: non-finite center");
    if (!(widths_[k] > 0.0) || !std::isfinite(widths_[k])) {
      throw std::invalid_argument("RbfNetwork: widths must be positive and finite");
    }
  }
}

RbfNetwork::RbfNetwork(std::vector<Vec2> centers, double width)
    : RbfNetwork(centers, std::vector<double>(centers.size(), width)) {}

Eigen::VectorXd RbfNetwork::activations(const Vec2& v) const {
  Eigen::VectorXd phi(size());
  for (int k = 0; k < size(); ++k) {
    const double w = widths_[static_cast<std::size_t>(k)];
    phi[k] = std::exp(-(v - centers_[static_cast<std::size_t>(k)]).squaredNorm() / (w * w));
  }
  return phi;
}

double RbfNetwork::activation_norm(const Vec2& v) const { return activations(v).norm(); }

Eigen::Matrix<double, Eigen::Dynamic, 2> RbfNetwork::jacobian(const Vec2& v) const {
  const Eigen::VectorXd phi = activations(v);
  Eigen::Matrix<double, Eigen::Dynamic, 2> jac(size(), 2);
  for (int k = 0; k < size(); ++k) {
    const double w = widths_[static_cast<std::size_t>(k)];
    jac.row(k) = (-2.0 / (w * w) * phi[k]) * (v - centers_[static_cast<std::size_t>(k)]).transpose();
  }
  return jac;
}

}  // namespace skidsim
