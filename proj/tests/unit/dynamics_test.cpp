#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "skidsim/dynamics.hpp"
#include "skidsim/errors.hpp"

using namespace skidsim;

namespace {

TerrainModel quiet_terrain() {
  TerrainModel t = no_slip_terrain();
  t.disturbance = NominalDisturbance::none();
  return t;
}

PlantState at_rest() { return PlantState{}; }

}  // namespace

TEST(SlipRatio, MatchedSpeedsGiveZero) { EXPECT_DOUBLE_EQ(slip_ratio(2.0, 2.0), 0.0); }

TEST(SlipRatio, SpinningWheel) { EXPECT_DOUBLE_EQ(slip_ratio(2.0, 1.0), 0.5); }

TEST(SlipRatio, SkiddingWheel) { EXPECT_DOUBLE_EQ(slip_ratio(1.0, 2.0), -0.5); }

TEST(SlipRatio, BothZeroIsZero) { EXPECT_DOUBLE_EQ(slip_ratio(0.0, 0.0), 0.0); }

TEST(SlipRatio, ReverseUsesMagnitudes) {
  EXPECT_DOUBLE_EQ(slip_ratio(-2.0, -1.0), 0.5);
  EXPECT_DOUBLE_EQ(slip_ratio(-1.0, -2.0), -0.5);
}

TEST(SlipRatio, OppositeSignsRejected) {
  EXPECT_THROW(slip_ratio(1.0, -1.0), DomainError);
  EXPECT_THROW(slip_ratio(-0.5, 0.5), DomainError);
}

TEST(SlipRatio, AntisymmetryUpToNormalization) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0.01, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = d(rng), b = d(rng);
    const double lhs = slip_ratio(a, b);
    const double rhs = -slip_ratio(b, a) * std::max(b, a) / std::max(a, b);
    EXPECT_NEAR(lhs, rhs, 1e-12);
    EXPECT_LT(std::abs(lhs), 1.0);
  }
}

TEST(SlipMultiplier, Examples) {
  EXPECT_DOUBLE_EQ(slip_multiplier(0.0), 1.0);
  EXPECT_DOUBLE_EQ(slip_multiplier(0.9), 1.9);
  EXPECT_DOUBLE_EQ(slip_multiplier(-0.5), 0.5);
}

TEST(SlipMultiplier, OutsideUnitIntervalRejected) {
  EXPECT_THROW(slip_multiplier(1.0), DomainError);
  EXPECT_THROW(slip_multiplier(-1.2), DomainError);
  EXPECT_THROW(slip_multiplier(NAN), DomainError);
}

TEST(Terrains, BuiltinRangesMatchTable) {
  const auto& t = builtin_terrains();
  ASSERT_EQ(t.size(), 5u);
  const struct {
    const char* name;
    double ll, lh, rl, rh;
  } expected[] = {{"Dry asphalt", 0.05, 0.40, 0.05, 0.20},
                  {"Wet asphalt", 0.05, 0.80, 0.05, 0.50},
                  {"Gravel", 0.05, 0.50, 0.05, 0.40},
                  {"Mud", 0.05, 0.70, 0.05, 0.50},
                  {"Ice", 0.05, 0.90, 0.05, 0.75}};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(t[i].name, expected[i].name);
    EXPECT_DOUBLE_EQ(t[i].slip_left.lo, expected[i].ll);
    EXPECT_DOUBLE_EQ(t[i].slip_left.hi, expected[i].lh);
    EXPECT_DOUBLE_EQ(t[i].slip_right.lo, expected[i].rl);
    EXPECT_DOUBLE_EQ(t[i].slip_right.hi, expected[i].rh);
    EXPECT_GE(t[i].slip_left.hi, t[i].slip_right.hi);
    EXPECT_DOUBLE_EQ(t[i].resample_period, 2.0);
    EXPECT_DOUBLE_EQ(t[i].smoothing_tau, 0.3);
    EXPECT_NO_THROW(t[i].validate());
  }
}

TEST(Terrains, LookupIgnoresCaseAndSeparators) {
  ASSERT_TRUE(find_builtin_terrain("dry_asphalt"));
  EXPECT_EQ(find_builtin_terrain("DRY-ASPHALT")->name, "Dry asphalt");
  EXPECT_EQ(find_builtin_terrain("ice")->name, "Ice");
  EXPECT_FALSE(find_builtin_terrain("lava"));
}

TEST(Terrains, InvalidIntervalsRejected) {
  TerrainModel t = no_slip_terrain();
  t.slip_left = {0.5, 0.2};
  EXPECT_THROW(t.validate(), ConfigError);
  t.slip_left = {0.0, 1.0};
  EXPECT_THROW(t.validate(), ConfigError);
  t.slip_left = {0.0, 0.1};
  t.resample_period = 0.0;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(PlantParams, Defaults) {
  const PlantParams p;
  EXPECT_DOUBLE_EQ(p.wheelbase, 1.85);
  EXPECT_DOUBLE_EQ(p.c_visc, 0.8);
  EXPECT_DOUBLE_EQ(p.c_quad, 0.25);
  EXPECT_DOUBLE_EQ(p.c_couple, 0.1);
  EXPECT_NO_THROW(p.validate());
}

TEST(PlantParams, NonPositiveGainRejected) {
  PlantParams p;
  p.g_left = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.g_left = 1.0;
  p.wheelbase = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(ResampleSlip, DrawsStayInTableRanges) {
  const TerrainModel ice = *find_builtin_terrain("Ice");
  const TerrainModel dry = *find_builtin_terrain("Dry asphalt");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    for (int i = 0; i < 100; ++i) {
      const double a = resample_slip(ice, Side::kLeft, rng);
      EXPECT_GE(a, 0.05);
      EXPECT_LE(a, 0.90);
      const double b = resample_slip(dry, Side::kRight, rng);
      EXPECT_GE(b, 0.05);
      EXPECT_LE(b, 0.20);
    }
  }
}

TEST(ResampleSlip, PointIntervalIsExact) {
  TerrainModel t = no_slip_terrain();
  t.slip_left = t.slip_right = {0.3, 0.3};
  Rng rng(5);
  EXPECT_DOUBLE_EQ(resample_slip(t, Side::kLeft, rng), 0.3);
  EXPECT_DOUBLE_EQ(resample_slip(t, Side::kRight, rng), 0.3);
}

TEST(ResampleSlip, FixedSeedIsDeterministic) {
  const TerrainModel mud = *find_builtin_terrain("Mud");
  Rng a(77), b(77);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(resample_slip(mud, Side::kLeft, a), resample_slip(mud, Side::kLeft, b));
  }
}

TEST(PlantDerivative, RestIsEquilibrium) {
  const SideAccel a = plant_derivative(at_rest(), 0.0, 0.0, PlantParams{}, quiet_terrain());
  EXPECT_DOUBLE_EQ(a.right, 0.0);
  EXPECT_DOUBLE_EQ(a.left, 0.0);
}

TEST(PlantDerivative, DragAtUnitSpeed) {
  PlantState s;
  s.v_right = s.v_left = 1.0;
  const SideAccel a = plant_derivative(s, 0.0, 0.0, PlantParams{}, quiet_terrain());
  EXPECT_NEAR(a.right, -1.05, 1e-15);
  EXPECT_NEAR(a.left, -1.05, 1e-15);
}

TEST(PlantDerivative, CouplingPullsSidesTogether) {
  PlantState s;
  s.v_right = 1.0;
  s.v_left = 0.0;
  const SideAccel a = plant_derivative(s, 0.0, 0.0, PlantParams{}, quiet_terrain());
  EXPECT_NEAR(a.right, -0.8 - 0.25 - 0.1, 1e-15);
  EXPECT_NEAR(a.left, 0.1, 1e-15);
}

TEST(PlantDerivative, DisturbanceScalesWithSlipMultiplier) {
  TerrainModel t = no_slip_terrain();
  PlantState s;
  s.t = 1.7;
  const SideAccel base = plant_derivative(s, 0.0, 0.0, PlantParams{}, t);
  s.s_right = s.s_left = 0.9;
  const SideAccel slipped = plant_derivative(s, 0.0, 0.0, PlantParams{}, t);
  EXPECT_NEAR(slipped.right / base.right, 1.9, 1e-12);
  EXPECT_NEAR(slipped.left / base.left, 1.9, 1e-12);
}

TEST(PlantDerivative, AffineInControlWithSlopeG) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  PlantParams p;
  p.g_right = 0.8;
  p.g_left = 1.2;
  const TerrainModel t = *find_builtin_terrain("Gravel");
  for (int i = 0; i < 200; ++i) {
    PlantState s;
    s.v_right = d(rng);
    s.v_left = d(rng);
    s.s_right = 0.3;
    s.s_left = 0.1;
    s.t = std::abs(d(rng)) * 10;
    const double u_r = d(rng), u_l = d(rng), h = 1e-3;
    const SideAccel a0 = plant_derivative(s, u_r, u_l, p, t);
    const SideAccel a1 = plant_derivative(s, u_r + h, u_l + h, p, t);
    EXPECT_NEAR((a1.right - a0.right) / h, p.g_right, 1e-9 * p.g_right);
    EXPECT_NEAR((a1.left - a0.left) / h, p.g_left, 1e-9 * p.g_left);
  }
}

TEST(PlantDerivative, NonFiniteInputFaults) {
  PlantState s;
  s.v_left = NAN;
  EXPECT_THROW(plant_derivative(s, 0.0, 0.0, PlantParams{}, quiet_terrain()), IntegrationFault);
  EXPECT_THROW(plant_derivative(PlantState{}, INFINITY, 0.0, PlantParams{}, quiet_terrain()),
               IntegrationFault);
}

TEST(PlantDerivative, UnforcedSpeedNeverGrows) {
  // Explicit Euler with a small step is enough to see the sign of d|V|^2/dt.
  PlantState s;
  s.v_right = 1.3;
  s.v_left = -0.7;
  double prev = std::hypot(s.v_right, s.v_left);
  for (int i = 0; i < 5000; ++i) {
    const SideAccel a = plant_derivative(s, 0.0, 0.0, PlantParams{}, quiet_terrain());
    EXPECT_LE(s.v_right * a.right + s.v_left * a.left, 0.0);
    s.v_right += 1e-3 * a.right;
    s.v_left += 1e-3 * a.left;
    const double norm = std::hypot(s.v_right, s.v_left);
    EXPECT_LE(norm, prev + 1e-15);
    prev = norm;
  }
}

TEST(AdvanceSlip, FixedPointStays) {
  TerrainModel t = no_slip_terrain();
  t.slip_left = t.slip_right = {0.2, 0.2};
  PlantState s;
  s.s_right = s.s_left = s.s_target_right = s.s_target_left = 0.2;
  s.next_resample_t = 100.0;
  Rng rng(1);
  for (double dt : {1e-3, 0.05, 1.0}) {
    s = advance_slip(s, t, dt, rng);
    EXPECT_DOUBLE_EQ(s.s_right, 0.2);
    EXPECT_DOUBLE_EQ(s.s_left, 0.2);
  }
}

TEST(AdvanceSlip, FirstOrderStepResponse) {
  TerrainModel t = no_slip_terrain();
  PlantState s;
  s.s_target_right = s.s_target_left = 0.5;
  s.next_resample_t = 100.0;
  Rng rng(1);
  s = advance_slip(s, t, t.smoothing_tau, rng);
  EXPECT_NEAR(s.s_right, 0.5 * (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(s.s_right, 0.316, 1e-3);
}

TEST(AdvanceSlip, FiveResampleEventsInTenSeconds) {
  const TerrainModel t = *find_builtin_terrain("Wet asphalt");
  Rng rng(9);
  PlantState s = initial_plant_state(t, rng);
  EXPECT_EQ(s.resample_count, 1u);
  const double dt = 1e-3;
  for (int i = 0; i < 10000; ++i) s = advance_slip(s, t, dt, rng);
  EXPECT_NEAR(s.t, 10.0, 1e-9);
  // Events at t = 0, 2, 4, 6, 8; the one at 10 s belongs to the next step.
  EXPECT_EQ(s.resample_count, 5u);
}

TEST(AdvanceSlip, SlipStaysInsideUnitIntervalOnAllTerrains) {
  for (const auto& t : builtin_terrains()) {
    Rng rng(123);
    PlantState s = initial_plant_state(t, rng);
    for (int i = 0; i < 60000; ++i) {
      s = advance_slip(s, t, 1e-3, rng);
      ASSERT_LT(std::abs(s.s_right), 1.0);
      ASSERT_LT(std::abs(s.s_left), 1.0);
      const double mu = slip_multiplier(s.s_left);
      ASSERT_GT(mu, 0.0);
      ASSERT_LT(mu, 2.0);
    }
  }
}

TEST(AdvanceSlip, FixedSeedGivesIdenticalTrajectory) {
  const TerrainModel t = *find_builtin_terrain("Ice");
  Rng a(42), b(42);
  PlantState sa = initial_plant_state(t, a), sb = initial_plant_state(t, b);
  for (int i = 0; i < 20000; ++i) {
    sa = advance_slip(sa, t, 1e-3, a);
    sb = advance_slip(sb, t, 1e-3, b);
    ASSERT_EQ(sa.s_right, sb.s_right);
    ASSERT_EQ(sa.s_left, sb.s_left);
  }
}

TEST(AdvanceSlip, ZeroTauJumpsToTarget) {
  TerrainModel t = no_slip_terrain();
  t.smoothing_tau = 0.0;
  PlantState s;
  s.s_target_right = 0.4;
  s.next_resample_t = 100.0;
  Rng rng(1);
  s = advance_slip(s, t, 1e-3, rng);
  EXPECT_DOUBLE_EQ(s.s_right, 0.4);
}

TEST(NominalDisturbance, BiasedSinusoid) {
  const NominalDisturbance d;
  EXPECT_DOUBLE_EQ(d.at(0.0), 0.1);
  EXPECT_NEAR(d.at(1.0 / (4 * 0.08)), 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(NominalDisturbance::none().at(3.0), 0.0);
}
