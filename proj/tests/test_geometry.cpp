#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "poleloc/error.hpp"
#include "poleloc/geometry.hpp"

using namespace poleloc;

namespace {

// Minimizes |m - y + 2 pi k| over a small range of k, preferring the
// representative inside [-pi, pi).
double diff_oracle(double m, double y) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = -2; k <= 2; ++k) {
    const double c = m - y + kTwoPi * k;
    if (c >= -kPi && c < kPi && std::abs(c) < std::abs(best)) best = c;
  }
  return best;
}

}  // namespace

TEST(WrapAngle, Examples) {
  EXPECT_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), -kPi);
  EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0) + kTwoPi, 3.0 * kPi / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), -kPi);
}

TEST(WrapAngle, RejectsNonFinite) {
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(angular_diff(0.0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST(WrapAngle, RangeAndMultipleOfTwoPi) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng);
    const double r = wrap_angle(a);
    ASSERT_GE(r, -kPi);
    ASSERT_LT(r, kPi);
    const double turns = (r - a) / kTwoPi;
    ASSERT_NEAR(turns, std::round(turns), 1e-9);
    ASSERT_EQ(wrap_angle(r), r);
  }
}

TEST(AngularDiff, Examples) {
  EXPECT_NEAR(angular_diff(0.3, 0.1), 0.2, 1e-15);
  EXPECT_NEAR(angular_diff(-3.0, 3.0), -6.0 + kTwoPi, 1e-15);
  EXPECT_NEAR(angular_diff(-3.0, 3.0), 0.28318530717958623, 1e-15);
  for (double a : {-3.0, -0.5, 0.0, 1.0, 3.1}) EXPECT_EQ(angular_diff(a, a), 0.0);
}

TEST(AngularDiff, GridOracle) {
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double m = -kPi + kTwoPi * i / n + 1e-3;
      const double y = -kPi + kTwoPi * j / n + 2e-3;
      const double d = angular_diff(m, y);
      ASSERT_NEAR(d, diff_oracle(m, y), 1e-12) << m << " " << y;
      ASSERT_LE(std::abs(d), kPi);
    }
  }
}

TEST(Pose2D, KeepsThetaWrapped) {
  Pose2D p(1.0, 2.0, 3.0 * kPi);
  EXPECT_GE(p.theta, -kPi);
  EXPECT_LT(p.theta, kPi);
  EXPECT_DOUBLE_EQ(p.theta, -kPi);
  Extrinsics e(0.0, 0.0, 2.0 * kPi + 0.5);
  EXPECT_NEAR(e.rotation, 0.5, 1e-12);
}

TEST(Transform, Examples) {
  const Vec2 a = transform_to_frame({1, 0}, Pose2D(0, 0, 0));
  EXPECT_NEAR(a.x(), 1.0, 1e-15);
  EXPECT_NEAR(a.y(), 0.0, 1e-15);

  const Pose2D turned(0, 0, kPi / 2);
  const Vec2 b = transform_to_frame({0, 1}, turned);
  EXPECT_NEAR(b.x(), 1.0, 1e-15);
  EXPECT_NEAR(b.y(), 0.0, 1e-15);
  EXPECT_NEAR((transform_from_frame(b, turned) - Vec2(0, 1)).norm(), 0.0, 1e-12);

  const Vec2 c = transform_to_frame({2, 3}, Pose2D(2, 3, 1.1));
  EXPECT_NEAR(c.norm(), 0.0, 1e-15);
}

TEST(Transform, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-500.0, 500.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    const Pose2D pose(pos(rng), pos(rng), ang(rng));
    const Vec2 p(pos(rng), pos(rng));
    const Vec2 back = transform_from_frame(transform_to_frame(p, pose), pose);
    ASSERT_LE((back - p).norm(), 1e-12);
  }
}

TEST(Compose, SensorPose) {
  const Pose2D v(10, 5, kPi / 2);
  const Pose2D s = compose(v, Extrinsics(1.5, 0.2, -kPi / 2));
  EXPECT_NEAR(s.x, 10 - 0.2, 1e-12);
  EXPECT_NEAR(s.y, 5 + 1.5, 1e-12);
  EXPECT_NEAR(s.theta, 0.0, 1e-12);
}
