#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "skidsim/rbfnn.hpp"

using namespace skidsim;

namespace {

// Every draw is exactly 0.5 after the 53-bit conversion.
struct HalfGenerator {
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return result_type{1} << 63; }
};

RbfNetwork three_neurons() { return RbfNetwork({{0, 0}, {1, 0}, {0, 1}}, 1.0); }

}  // namespace

TEST(RbfNetwork, ActivationIsOneAtCenter) {
  const RbfNetwork net({{0.3, -0.2}, {0.5, 0.5}}, 0.13);
  EXPECT_DOUBLE_EQ(net.activations({0.3, -0.2})(0), 1.0);
  EXPECT_DOUBLE_EQ(net.activations({0.5, 0.5})(1), 1.0);
}

TEST(RbfNetwork, ActivationAtOneWidth) {
  const RbfNetwork net({{0.0, 0.0}}, 0.5);
  EXPECT_NEAR(net.activations({0.3, 0.4})(0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(net.activations({0.3, 0.4})(0), 0.36788, 1e-5);
}

TEST(RbfNetwork, ThreeNeuronExample) {
  const Eigen::VectorXd phi = three_neurons().activations({0, 0});
  ASSERT_EQ(phi.size(), 3);
  EXPECT_DOUBLE_EQ(phi(0), 1.0);
  EXPECT_NEAR(phi(1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(phi(2), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(three_neurons().activation_norm({0, 0}), std::sqrt(1 + 2 * std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(three_neurons().activation_norm({0, 0}), 1.12724, 1e-5);
}

TEST(RbfNetwork, SingleNeuronNormAtCenter) {
  const RbfNetwork net({{0.2, 0.1}}, 0.15);
  EXPECT_DOUBLE_EQ(net.activation_norm({0.2, 0.1}), 1.0);
}

TEST(RbfNetwork, BoundsHoldOnRandomNets) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(trial);
    const int L = 1 + trial % 12;
    const RbfNetwork net = init_centers(L, 0.05 + 0.01 * (trial % 30), 1.0, rng);
    for (int i = 0; i < 20; ++i) {
      const Vec2 v(d(gen), d(gen));
      const Eigen::VectorXd phi = net.activations(v);
      for (int k = 0; k < L; ++k) {
        EXPECT_GE(phi(k), 0.0);
        EXPECT_LE(phi(k), 1.0);
        if (net.centers()[k] != v) {
          EXPECT_LT(phi(k), 1.0);
        }
      }
      EXPECT_LE(net.activation_norm(v), std::sqrt(static_cast<double>(L)) + 1e-15);
    }
  }
}

TEST(RbfNetwork, StrictlyPositiveNearCenters) {
  const RbfNetwork net({{0, 0}, {0.5, -0.5}}, 0.13);
  for (double r = 0.0; r < 0.8; r += 0.05) {
    const Eigen::VectorXd phi = net.activations({r, -r});
    EXPECT_GT(phi(0), 0.0);
    EXPECT_GT(phi(1), 0.0);
  }
}

TEST(RbfNetwork, RadiallyMonotone) {
  const RbfNetwork net({{0.1, 0.2}}, 0.4);
  for (double angle = 0; angle < 6.2; angle += 0.5) {
    const Vec2 dir(std::cos(angle), std::sin(angle));
    double prev = 1.0;
    for (double r = 0.01; r < 2.0; r += 0.01) {
      const double phi = net.activations(Vec2(0.1, 0.2) + r * dir)(0);
      EXPECT_LT(phi, prev);
      prev = phi;
    }
  }
}

TEST(RbfNetwork, JacobianMatchesFiniteDifference) {
  Rng rng(17);
  const RbfNetwork net = init_centers(9, 0.13, 1.0, rng);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const Vec2 v(d(gen), d(gen));
    const auto jac = net.jacobian(v);
    for (int axis = 0; axis < 2; ++axis) {
      Vec2 step = Vec2::Zero();
      step(axis) = h;
      const Eigen::VectorXd fd = (net.activations(v + step) - net.activations(v - step)) / (2 * h);
      for (int k = 0; k < net.size(); ++k) {
        // Relative error is meaningless where the gradient underflows.
        if (std::abs(jac(k, axis)) < 1e-6) continue;
        worst = std::max(worst, std::abs(fd(k) - jac(k, axis)) / std::abs(jac(k, axis)));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
  EXPECT_LT(worst, 1e-6);
}

TEST(RbfNetwork, RejectsBadConstruction) {
  EXPECT_THROW(RbfNetwork(std::vector<Vec2>{}, 1.0), std::invalid_argument);
  EXPECT_THROW(RbfNetwork({{0, 0}}, 0.0), std::invalid_argument);
  EXPECT_THROW(RbfNetwork({{0, 0}}, -1.0), std::invalid_argument);
  EXPECT_THROW(RbfNetwork({{0, NAN}}, 1.0), std::invalid_argument);
  EXPECT_THROW(RbfNetwork({{0, 0}, {1, 1}}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(InitCenters, NineCentersInUnitSquare) {
  Rng rng(2024);
  const RbfNetwork net = init_centers(9, 0.13, 1.0, rng);
  ASSERT_EQ(net.size(), 9);
  for (const auto& c : net.centers()) {
    EXPECT_GE(c.x(), -1.0);
    EXPECT_LE(c.x(), 1.0);
    EXPECT_GE(c.y(), -1.0);
    EXPECT_LE(c.y(), 1.0);
  }
  for (double w : net.widths()) EXPECT_DOUBLE_EQ(w, 0.13);
}

TEST(InitCenters, EightCentersForFieldPreset) {
  Rng rng(8);
  const RbfNetwork net = init_centers(8, 0.15, 1.0, rng);
  ASSERT_EQ(net.size(), 8);
  for (const auto& c : net.centers()) EXPECT_LE(c.cwiseAbs().maxCoeff(), 1.0);
}

TEST(InitCenters, HalfDrawGivesOrigin) {
  HalfGenerator g;
  const RbfNetwork net = init_centers(1, 1.0, 1.0, g);
  EXPECT_DOUBLE_EQ(net.centers()[0].x(), 0.0);
  EXPECT_DOUBLE_EQ(net.centers()[0].y(), 0.0);
}

TEST(InitCenters, ScaleStretchesSquare) {
  Rng rng(1);
  const RbfNetwork net = init_centers(200, 0.1, 2.5, rng);
  double max_abs = 0.0;
  for (const auto& c : net.centers()) max_abs = std::max(max_abs, c.cwiseAbs().maxCoeff());
  EXPECT_LE(max_abs, 2.5);
  EXPECT_GT(max_abs, 2.0);
}

TEST(InitCenters, DeterministicPerSeed) {
  Rng a(99), b(99);
  EXPECT_EQ(init_centers(9, 0.13, 1.0, a).centers(), init_centers(9, 0.13, 1.0, b).centers());
}

TEST(InitCenters, RejectsBadArguments) {
  Rng rng(1);
  EXPECT_THROW(init_centers(0, 0.1, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(init_centers(3, 0.1, 0.0, rng), std::invalid_argument);
}
