#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "poleloc/error.hpp"
#include "poleloc/metrics.hpp"

using namespace poleloc;

namespace {

std::vector<TruthSample> truth_at(const Pose2D& pose) {
  TruthSample t;
  t.t = 1.0;
  t.pose = pose;
  return {t};
}

EstimateSample estimate_at(double t, const Pose2D& pose) {
  EstimateSample e;
  e.t = t;
  e.pose = pose;
  return e;
}

ErrorSeries positions(const std::vector<double>& errs) {
  ErrorSeries s;
  for (double e : errs) {
    ErrorSample x;
    x.position = std::abs(e);
    x.cross_track = e;
    s.push_back(x);
  }
  return s;
}

ErrorSeries random_series(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  ErrorSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    ErrorSample x;
    x.cross_track = g(rng);
    x.along_track = g(rng);
    x.position = std::hypot(x.cross_track, x.along_track);
    x.heading = 0.01 * g(rng);
    x.nees = x.position * x.position;
    s.push_back(x);
  }
  return s;
}

}  // namespace

TEST(ComputeErrors, Examples) {
  auto s = compute_errors({estimate_at(1.0, Pose2D(5, 5, 0))}, truth_at(Pose2D(5, 5, 0)));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].position, 0.0);
  EXPECT_EQ(s[0].cross_track, 0.0);
  EXPECT_EQ(s[0].along_track, 0.0);
  EXPECT_EQ(s[0].nees, 0.0);

  s = compute_errors({estimate_at(1.0, Pose2D(0, 0.4, 0))}, truth_at(Pose2D(0, 0, 0)));
  EXPECT_NEAR(s[0].cross_track, 0.4, 1e-15);
  EXPECT_NEAR(s[0].along_track, 0.0, 1e-15);

  s = compute_errors({estimate_at(1.0, Pose2D(0.3, 0, kPi / 2))}, truth_at(Pose2D(0, 0, kPi / 2)));
  EXPECT_NEAR(s[0].cross_track, -0.3, 1e-15);
  EXPECT_NEAR(s[0].along_track, 0.0, 1e-15);
}

TEST(ComputeErrors, NeesAndHeading) {
  EstimateSample e = estimate_at(1.0, Pose2D(2, 0, 0.1));
  e.position_covariance << 4, 0, 0, 1;
  const auto s = compute_errors({e}, truth_at(Pose2D(0, 0, 0)));
  EXPECT_NEAR(s[0].nees, 1.0, 1e-15);
  EXPECT_NEAR(s[0].heading, 0.1, 1e-15);
}

TEST(ComputeErrors, AlignmentTolerance) {
  const auto truth = truth_at(Pose2D(0, 0, 0));
  EXPECT_EQ(compute_errors({estimate_at(1.009, Pose2D(1, 0, 0))}, truth).size(), 1u);
  EXPECT_TRUE(compute_errors({estimate_at(1.02, Pose2D(1, 0, 0))}, truth).empty());
  EXPECT_TRUE(compute_errors({}, truth).empty());
}

TEST(ComputeErrors, DecompositionPreservesNorm) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  std::vector<EstimateSample> est;
  std::vector<TruthSample> truth;
  for (int i = 0; i < 1000; ++i) {
    TruthSample t;
    t.t = 0.02 * i;
    t.pose = Pose2D(u(rng), u(rng), a(rng));
    truth.push_back(t);
    est.push_back(estimate_at(t.t, Pose2D(u(rng), u(rng), a(rng))));
  }
  const auto s = compute_errors(est, truth);
  ASSERT_EQ(s.size(), 1000u);
  for (const auto& x : s) {
    ASSERT_NEAR(x.cross_track * x.cross_track + x.along_track * x.along_track,
                x.position * x.position, 1e-9);
  }
}

TEST(Rms, Examples) {
  EXPECT_DOUBLE_EQ(rms(positions({1.0, 1.0, 1.0})), 1.0);
  EXPECT_DOUBLE_EQ(rms(positions({3.0, 4.0})), std::sqrt(12.5));
  EXPECT_NEAR(rms(positions({3.0, 4.0})), 3.5355, 1e-4);
  EXPECT_EQ(rms(positions({0.0, 0.0})), 0.0);
  EXPECT_THROW(rms({}), DomainError);
}

TEST(Rms, OrderInvariant) {
  std::mt19937_64 rng(2);
  auto s = random_series(rng, 101);
  const double before = rms(s);
  std::shuffle(s.begin(), s.end(), rng);
  EXPECT_NEAR(rms(s), before, 1e-12 * before);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({-1.0, 0.0, 1.0}, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.75), 7.0);
  EXPECT_THROW(quantile({}, 0.5), DomainError);
}

TEST(Summarize, SymmetricAndSingle) {
  auto s = summarize(positions({-1.0, 0.0, 1.0}));
  EXPECT_EQ(s.cross_track.signed_quartiles.median, 0.0);
  EXPECT_EQ(s.samples, 3u);

  s = summarize(positions({2.5}));
  EXPECT_EQ(s.cross_track.signed_quartiles.q1, 2.5);
  EXPECT_EQ(s.cross_track.signed_quartiles.median, 2.5);
  EXPECT_EQ(s.cross_track.signed_quartiles.q3, 2.5);
  EXPECT_THROW(summarize({}), DomainError);
}

TEST(Summarize, ConsistencyBand) {
  const auto [lo, hi] = chi_square_band(2, 0.95);
  EXPECT_NEAR(lo, -2.0 * std::log(0.975), 1e-12);
  EXPECT_NEAR(hi, -2.0 * std::log(0.025), 1e-12);
  ErrorSeries s(4);
  s[0].nees = 0.01;
  s[1].nees = 1.0;
  s[2].nees = 3.0;
  s[3].nees = 20.0;
  EXPECT_DOUBLE_EQ(summarize(s).nees_consistency, 0.5);
}

// Standard normal position errors with unit covariance: NEES is chi-square(2).
TEST(Summarize, ConsistencyOfCalibratedErrors) {
  std::mt19937_64 rng(3);
  const auto s = summarize(random_series(rng, 20000));
  EXPECT_NEAR(s.nees_consistency, 0.95, 0.01);
  EXPECT_NEAR(s.nees_mean, 2.0, 0.05);
}

// Moments and the median survive duplication exactly. The outer quartiles of
// an interpolated quantile can move, but only between the same neighbouring
// order statistics.
TEST(Summarize, DuplicatedSeries) {
  std::mt19937_64 rng(4);
  for (std::size_t n : {1u, 2u, 7u, 50u}) {
    const auto s = random_series(rng, n);
    ErrorSeries twice = s;
    twice.insert(twice.end(), s.begin(), s.end());
    const auto a = summarize(s);
    const auto b = summarize(twice);
    EXPECT_NEAR(a.rms, b.rms, 1e-12);
    EXPECT_NEAR(a.mean, b.mean, 1e-12);
    EXPECT_EQ(a.max, b.max);
    EXPECT_EQ(a.nees_consistency, b.nees_consistency);
    EXPECT_NEAR(a.heading_rms, b.heading_rms, 1e-12);
    EXPECT_NEAR(a.cross_track.mean, b.cross_track.mean, 1e-12);
    EXPECT_EQ(a.cross_track.max_abs, b.cross_track.max_abs);
    EXPECT_NEAR(a.cross_track.signed_quartiles.median, b.cross_track.signed_quartiles.median, 1e-15);
    EXPECT_NEAR(a.along_track.abs_quartiles.median, b.along_track.abs_quartiles.median, 1e-15);

    std::vector<double> ct;
    for (const auto& x : s) ct.push_back(x.cross_track);
    std::sort(ct.begin(), ct.end());
    for (double p : {0.25, 0.75}) {
      const double pos = p * static_cast<double>(n - 1);
      const double lo = ct[static_cast<std::size_t>(std::floor(pos))];
      const double hi = ct[static_cast<std::size_t>(std::ceil(pos))];
      const double got = p == 0.25 ? b.cross_track.signed_quartiles.q1
                                   : b.cross_track.signed_quartiles.q3;
      EXPECT_GE(got, lo);
      EXPECT_LE(got, hi);
    }
  }
}
