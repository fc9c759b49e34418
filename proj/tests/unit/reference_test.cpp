#include <gtest/gtest.h>

#include <cmath>

#include "skidsim/errors.hpp"
#include "skidsim/reference.hpp"

using namespace skidsim;

TEST(Profiles, StationaryIsZero) {
  for (double t : {0.0, 1.0, 150.0}) {
    const ReferenceSample s = reference_at(StationaryProfile{}, t);
    EXPECT_EQ(s.v_right, 0.0);
    EXPECT_EQ(s.v_left, 0.0);
    EXPECT_EQ(s.rate_right, 0.0);
    EXPECT_EQ(s.rate_left, 0.0);
  }
}

TEST(Profiles, PivotSidesOpposite) {
  for (double t : {0.0, 3.3, 99.0}) {
    const ReferenceSample s = reference_at(PivotProfile{0.3}, t);
    EXPECT_DOUBLE_EQ(s.v_right, 0.3);
    EXPECT_DOUBLE_EQ(s.v_left, -0.3);
    EXPECT_DOUBLE_EQ(s.v_right, -s.v_left);
  }
}

TEST(Profiles, StepJumpsWithZeroRate) {
  const StepProfile p{0.5, 0.4, 1.0};
  EXPECT_EQ(reference_at(p, 0.5).v_right, 0.0);
  EXPECT_DOUBLE_EQ(reference_at(p, 1.0).v_right, 0.5);
  EXPECT_DOUBLE_EQ(reference_at(p, 2.0).v_left, 0.4);
  EXPECT_EQ(reference_at(p, 1.0).rate_right, 0.0);
}

TEST(Profiles, RampHold) {
  const RampHoldProfile p{0.5, 1.0, 1.0, 2.0};
  EXPECT_EQ(reference_at(p, 0.5).v_right, 0.0);
  EXPECT_NEAR(reference_at(p, 2.0).v_right, 0.25, 1e-15);
  EXPECT_NEAR(reference_at(p, 2.0).rate_left, 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(reference_at(p, 10.0).v_left, 1.0);
  EXPECT_EQ(reference_at(p, 10.0).rate_left, 0.0);
}

TEST(Profiles, CurvedPathHoldsAfterRamp) {
  const CurvedPathProfile p;
  const ReferenceSample end = reference_at(p, 50.0);
  EXPECT_DOUBLE_EQ(end.v_right, 1.0);
  EXPECT_DOUBLE_EQ(end.v_left, 0.7);
  EXPECT_EQ(end.rate_right, 0.0);
  EXPECT_EQ(end.rate_left, 0.0);
  const ReferenceSample start = reference_at(p, 0.0);
  EXPECT_EQ(start.v_right, 0.0);
  EXPECT_EQ(start.rate_right, 0.0);
}

TEST(Profiles, CurvedPathRateMatchesFiniteDifference) {
  const CurvedPathProfile p;
  const double h = 1e-6;
  for (double t = 0.1; t < 10.0; t += 0.37) {
    const double fd_r = (reference_at(p, t + h).v_right - reference_at(p, t - h).v_right) / (2 * h);
    const double fd_l = (reference_at(p, t + h).v_left - reference_at(p, t - h).v_left) / (2 * h);
    EXPECT_NEAR(reference_at(p, t).rate_right, fd_r, 1e-7);
    EXPECT_NEAR(reference_at(p, t).rate_left, fd_l, 1e-7);
  }
  // Midpoint of the smoothstep: 1.5 * target / ramp_time.
  EXPECT_NEAR(reference_at(p, 5.0).rate_right, 0.15, 1e-12);
  EXPECT_NEAR(reference_at(p, 5.0).v_right, 0.5, 1e-12);
}

TEST(Profiles, NegativeTimeAndTeleopRejected) {
  EXPECT_THROW(reference_at(StationaryProfile{}, -1.0), std::invalid_argument);
  EXPECT_THROW(reference_at(TeleopProfile{}, 0.0), std::invalid_argument);
}

TEST(Profiles, Validation) {
  EXPECT_THROW(validate_profile(CurvedPathProfile{1.0, 0.7, 0.0}), ConfigError);
  EXPECT_THROW(validate_profile(StepProfile{NAN, 0.0, 0.0}), ConfigError);
  EXPECT_NO_THROW(validate_profile(PivotProfile{0.3}));
}

TEST(Profiles, Names) {
  EXPECT_EQ(profile_name(StepProfile{}), "step");
  EXPECT_EQ(profile_name(RampHoldProfile{}), "ramp-hold");
  EXPECT_EQ(profile_name(CurvedPathProfile{}), "curved-path");
  EXPECT_EQ(profile_name(PivotProfile{}), "pivot");
  EXPECT_EQ(profile_name(StationaryProfile{}), "stationary");
  EXPECT_EQ(profile_name(TeleopProfile{}), "teleop");
}

TEST(Teleop, HeldCommandRateSettlesToZero) {
  TeleopReference ref;
  ref.push({0, 0.5, 0.5}, 0.0);
  ReferenceSample s;
  for (int k = 0; k <= 20; ++k) {
    if (k % 5 == 0) ref.push({k * 10, 0.5, 0.5}, k * 0.01);
    s = ref.sample(k * 0.01);
  }
  EXPECT_DOUBLE_EQ(s.v_right, 0.5);
  EXPECT_EQ(s.rate_right, 0.0);
  EXPECT_EQ(s.rate_left, 0.0);
}

TEST(Teleop, StepGivesPulseOfSmootherWidth) {
  TeleopReference ref;
  const double dt = 0.01;
  ref.sample(0.0);
  ref.sample(dt);
  ref.push({1, 0.4, 0.4}, 1.5 * dt);
  int nonzero = 0;
  double area = 0.0;
  for (int k = 2; k < 20; ++k) {
    const ReferenceSample s = ref.sample(k * dt);
    if (s.rate_right != 0.0) {
      ++nonzero;
      EXPECT_NEAR(s.rate_right, 0.4 / dt / 5.0, 1e-9);
    }
    area += s.rate_right * dt;
  }
  EXPECT_EQ(nonzero, 5);
  EXPECT_NEAR(area, 0.4, 1e-12);
}

TEST(Teleop, WatchdogReachesZeroWithinOneAndAHalfSeconds) {
  TeleopReference ref;
  ref.push({0, 0.5, 0.5}, 0.0);
  double first_zero = -1.0;
  for (int k = 0; k <= 300; ++k) {
    const double t = k * 0.01;
    const ReferenceSample s = ref.sample(t);
    if (t < 0.5) {
      EXPECT_DOUBLE_EQ(s.v_right, 0.5);
    }
    if (t > 0.5 && t < 1.5) {
      EXPECT_LT(s.v_right, 0.5);
      EXPECT_GT(s.v_right, 0.0);
      EXPECT_TRUE(ref.watchdog_active());
    }
    if (first_zero < 0.0 && s.v_right == 0.0 && s.v_left == 0.0) first_zero = t;
  }
  EXPECT_GT(first_zero, 0.5);
  EXPECT_LE(first_zero, 1.5 + 0.01 + 1e-9);
}

TEST(Teleop, NoMessageHoldsZero) {
  TeleopReference ref;
  for (int k = 0; k < 50; ++k) {
    const ReferenceSample s = ref.sample(k * 0.01);
    EXPECT_EQ(s.v_right, 0.0);
    EXPECT_EQ(s.v_left, 0.0);
  }
  EXPECT_TRUE(ref.watchdog_active());
}

TEST(Teleop, OutOfOrderDropped) {
  TeleopReference ref;
  EXPECT_TRUE(ref.push({100, 0.3, 0.3}, 0.0));
  EXPECT_FALSE(ref.push({50, 0.9, 0.9}, 0.01));
  EXPECT_EQ(ref.dropped(), 1u);
  EXPECT_DOUBLE_EQ(ref.sample(0.02).v_right, 0.3);
}

TEST(Teleop, EstopLatchesUntilRelease) {
  TeleopReference ref;
  ref.push({0, 0.5, 0.5}, 0.0);
  EXPECT_DOUBLE_EQ(ref.sample(0.0).v_right, 0.5);
  ref.estop();
  const ReferenceSample s = ref.sample(0.01);
  EXPECT_EQ(s.v_right, 0.0);
  EXPECT_EQ(s.rate_right, 0.0);
  ref.push({10, 0.7, 0.7}, 0.02);
  EXPECT_EQ(ref.sample(0.02).v_right, 0.0);
  EXPECT_TRUE(ref.estopped());
  ref.release();
  ref.push({20, 0.7, 0.7}, 0.03);
  EXPECT_DOUBLE_EQ(ref.sample(0.03).v_right, 0.7);
}

TEST(Teleop, RateLimit) {
  TeleopReferenceOptions o;
  o.max_accel = 1.0;
  TeleopReference ref(o);
  ref.sample(0.0);
  ref.push({0, 1.0, -1.0}, 0.0);
  const ReferenceSample s = ref.sample(0.1);
  EXPECT_NEAR(s.v_right, 0.1, 1e-12);
  EXPECT_NEAR(s.v_left, -0.1, 1e-12);
}

TEST(Teleop, TimeMustNotGoBackwards) {
  TeleopReference ref;
  ref.sample(1.0);
  EXPECT_THROW(ref.sample(0.5), std::invalid_argument);
}

TEST(Teleop, RateLimitStartsFromRest) {
  TeleopReferenceOptions o;
  o.max_accel = 1.0;
  TeleopReference ref(o);
  ref.push({0, 0.5, 0.5}, 0.0);
  EXPECT_EQ(ref.sample(0.0).v_right, 0.0);
  EXPECT_NEAR(ref.sample(0.01).v_right, 0.01, 1e-15);
}
