#include <gtest/gtest.h>

#include <random>

#include "dafjam/physics.hpp"

using namespace dafjam;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::IoError;
}

}  // namespace

TEST(SpeedOfSound, KnownTemperatures) {
  EXPECT_DOUBLE_EQ(speed_of_sound(0.0), 331.5);
  EXPECT_NEAR(speed_of_sound(20.0), 343.7, 1e-12);
  EXPECT_NEAR(speed_of_sound(-10.0), 325.4, 1e-12);
}

TEST(SpeedOfSound, RejectsTemperaturesOutsideSanityBound) {
  EXPECT_NO_THROW(speed_of_sound(-40.0));
  EXPECT_NO_THROW(speed_of_sound(60.0));
  EXPECT_EQ(kind_of([] { speed_of_sound(-40.01); }), ErrorKind::TemperatureOutOfRange);
  EXPECT_EQ(kind_of([] { speed_of_sound(60.01); }), ErrorKind::TemperatureOutOfRange);
  EXPECT_EQ(kind_of([] { speed_of_sound(NAN); }), ErrorKind::TemperatureOutOfRange);
}

TEST(PathModel, LegCounts) {
  EXPECT_EQ(PathModel::round_trip().air_legs(), 2);
  EXPECT_EQ(PathModel::one_way().air_legs(), 1);
}

TEST(ArtificialDelay, MaximumRangeAtTwentyDegrees) {
  const auto sol = artificial_delay(0.2, {20.0, 34.37}, PathModel::round_trip());
  EXPECT_LE(std::abs(sol.artificial_delay_s), 1e-4);
  EXPECT_GE(sol.artificial_delay_s, 0.0);
}

TEST(ArtificialDelay, ZeroDistanceKeepsTarget) {
  const auto sol = artificial_delay(0.2, {20.0, 0.0}, PathModel::round_trip());
  EXPECT_EQ(sol.artificial_delay_s, 0.2);
  EXPECT_EQ(sol.air_delay_s, 0.0);
  EXPECT_EQ(sol.total_feedback_delay_s, 0.2);
}

TEST(ArtificialDelay, HalfRangeForTenthOfASecond) {
  // 2 * 17.185 / 343.7 = 0.1 exactly in decimal.
  const auto sol = artificial_delay(0.1, {20.0, 17.185}, PathModel::round_trip());
  EXPECT_LE(std::abs(sol.artificial_delay_s), 1e-4);
}

TEST(ArtificialDelay, SolutionFields) {
  const auto sol = artificial_delay(0.3, {10.0, 5.0}, PathModel::one_way());
  EXPECT_DOUBLE_EQ(sol.speed_of_sound_mps, 337.6);
  EXPECT_DOUBLE_EQ(sol.air_delay_s, 5.0 / 337.6);
  EXPECT_DOUBLE_EQ(sol.artificial_delay_s, 0.3 - 5.0 / 337.6);
  EXPECT_EQ(sol.total_feedback_delay_s, sol.artificial_delay_s + sol.air_delay_s);
}

TEST(ArtificialDelay, BeyondRangeIsAnError) {
  EXPECT_EQ(kind_of([] { artificial_delay(0.2, {20.0, 34.38}, PathModel::round_trip()); }),
            ErrorKind::DistanceTooFar);
  EXPECT_EQ(kind_of([] { artificial_delay(0.2, {20.0, 50.0}, PathModel::round_trip()); }),
            ErrorKind::DistanceTooFar);
  // One-way reaches twice as far.
  EXPECT_NO_THROW(artificial_delay(0.2, {20.0, 50.0}, PathModel::one_way()));
}

TEST(ArtificialDelay, InvalidInputs) {
  EXPECT_EQ(kind_of([] { artificial_delay(0.0, {20.0, 1.0}, PathModel::round_trip()); }),
            ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { artificial_delay(0.2, {20.0, -1.0}, PathModel::round_trip()); }),
            ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { artificial_delay(0.2, {70.0, 1.0}, PathModel::round_trip()); }),
            ErrorKind::TemperatureOutOfRange);
}

TEST(MaxDistance, KnownValues) {
  EXPECT_NEAR(max_distance(0.2, 20.0, PathModel::round_trip()), 34.37, 1e-9);
  EXPECT_NEAR(max_distance(0.2, 20.0, PathModel::one_way()), 68.74, 1e-9);
  EXPECT_EQ(max_distance(0.0, 20.0, PathModel::round_trip()), 0.0);
  EXPECT_EQ(kind_of([] { max_distance(0.2, -41.0, PathModel::round_trip()); }),
            ErrorKind::TemperatureOutOfRange);
}

// ---- properties -------------------------------------------------------------

class PhysicsProperty : public ::testing::Test {
 protected:
  std::mt19937 gen{20240611};
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  PathModel any_path() { return gen() % 2 ? PathModel::round_trip() : PathModel::one_way(); }
};

TEST_F(PhysicsProperty, DelayIdentity) {
  for (int i = 0; i < 2000; ++i) {
    const double d = uniform(1e-3, 2.0);
    const double t = uniform(-40.0, 60.0);
    const auto path = any_path();
    const double x = uniform(0.0, 1.0) * max_distance(d, t, path);
    const auto sol = artificial_delay(d, {t, x}, path);
    const double sum = sol.artificial_delay_s + path.air_legs() * x / speed_of_sound(t);
    EXPECT_NEAR(sum, d, 1e-12 * d) << "d=" << d << " t=" << t << " x=" << x;
  }
}

TEST_F(PhysicsProperty, MaxDistanceIsStrictlyIncreasing) {
  for (int i = 0; i < 500; ++i) {
    const double d = uniform(1e-3, 1.9);
    const double t = uniform(-40.0, 59.0);
    const auto path = any_path();
    const double base = max_distance(d, t, path);
    EXPECT_GT(max_distance(d + uniform(1e-6, 0.1), t, path), base);
    EXPECT_GT(max_distance(d, t + uniform(1e-3, 1.0), path), base);
  }
}

TEST_F(PhysicsProperty, BoundaryGivesZeroArtificialDelay) {
  for (int i = 0; i < 2000; ++i) {
    const double d = uniform(1e-3, 2.0);
    const double t = uniform(-40.0, 60.0);
    const auto path = any_path();
    const double x = max_distance(d, t, path);
    double got = -1.0;
    ASSERT_NO_THROW(got = artificial_delay(d, {t, x}, path).artificial_delay_s)
        << "d=" << d << " t=" << t;
    EXPECT_NEAR(got, 0.0, 1e-9);
  }
}

TEST_F(PhysicsProperty, FixedDelayJamsAtAnyDistance) {
  // A fixed artificial delay D gives total D + legs * x / v >= D.
  for (int i = 0; i < 1000; ++i) {
    const double t = uniform(-40.0, 60.0);
    const double x = uniform(0.0, 500.0);
    const auto path = any_path();
    const double total = 0.1 + air_delay({t, x}, path);
    EXPECT_GE(total, 0.1);
  }
}
