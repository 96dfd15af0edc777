#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "poleloc/error.hpp"
#include "poleloc/pole_map.hpp"

using namespace poleloc;

namespace {

std::vector<LandmarkId> ids(const std::vector<Landmark>& v) {
  std::vector<LandmarkId> out;
  for (const auto& l : v) out.push_back(l.id);
  return out;
}

}  // namespace

TEST(PoleMap, RejectsDuplicatesAndNonFinite) {
  EXPECT_THROW(PoleMap({{1, {0, 0}}, {1, {1, 1}}}), ConfigError);
  EXPECT_THROW(PoleMap({{1, {0, std::nan("")}}}), ConfigError);
}

TEST(PoleMap, SortsById) {
  PoleMap m({{5, {0, 0}}, {2, {1, 0}}, {9, {2, 0}}});
  EXPECT_EQ(ids(m.landmarks()), (std::vector<LandmarkId>{2, 5, 9}));
  ASSERT_NE(m.find(5), nullptr);
  EXPECT_EQ(m.find(5)->position, Vec2(0, 0));
  EXPECT_EQ(m.find(7), nullptr);
}

TEST(QueryRadius, Examples) {
  PoleMap m({{1, {0, 0}}, {2, {10, 0}}});
  EXPECT_EQ(ids(m.query_radius({0, 0}, 5)), (std::vector<LandmarkId>{1}));
  EXPECT_EQ(ids(m.query_radius({0, 0}, 1000)), (std::vector<LandmarkId>{1, 2}));
  EXPECT_EQ(ids(m.query_radius({0, 0}, 10)), (std::vector<LandmarkId>{1, 2}));  // inclusive
  EXPECT_THROW(m.query_radius({0, 0}, 0.0), DomainError);
  EXPECT_THROW(m.query_radius({0, 0}, -1.0), DomainError);
}

TEST(QueryRadius, MatchesLinearScan) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::uniform_real_distribution<double> r(1.0, 80.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Landmark> lms;
    for (int i = 0; i < 100; ++i) lms.push_back({(i * 37) % 101, {u(rng), u(rng)}});
    PoleMap m(lms);
    const Vec2 c(u(rng), u(rng));
    const double radius = r(rng);
    std::vector<LandmarkId> expected;
    for (const auto& l : lms) {
      if ((l.position - c).norm() <= radius) expected.push_back(l.id);
    }
    std::sort(expected.begin(), expected.end());
    ASSERT_EQ(ids(m.query_radius(c, radius)), expected);
  }
}

TEST(ProjectToCamera, Examples) {
  const Pose2D pose(0, 0, 0);
  const Extrinsics cam;
  auto angles = project_to_camera_angles(PoleMap({{1, {10, 0}}}), pose, cam, 50, kPi);
  ASSERT_EQ(angles.size(), 1u);
  EXPECT_NEAR(angles[0].alpha, 0.0, 1e-15);

  angles = project_to_camera_angles(PoleMap({{1, {10, 10}}}), pose, cam, 50, kPi);
  ASSERT_EQ(angles.size(), 1u);
  EXPECT_NEAR(angles[0].alpha, kPi / 4, 1e-15);

  angles = project_to_camera_angles(PoleMap({{1, {-10, 0}}}), pose, cam, 50, kPi / 2);
  EXPECT_TRUE(angles.empty());
}

TEST(ProjectToCamera, FovRadiusAndPrecondition) {
  PoleMap m({{1, {10, 0}}, {2, {5, -20}}, {3, {60, 0}}, {4, {0, 10}}});
  auto angles = project_to_camera_angles(m, Pose2D(0, 0, 0), Extrinsics(), 50, kPi / 2);
  ASSERT_EQ(angles.size(), 1u);
  EXPECT_EQ(angles[0].id, 1);
  // Side camera looking left sees landmark 4 on its axis.
  angles = project_to_camera_angles(m, Pose2D(0, 0, 0), Extrinsics(0, 0, kPi / 2), 50, kPi / 2);
  ASSERT_EQ(angles.size(), 1u);
  EXPECT_EQ(angles[0].id, 4);
  EXPECT_NEAR(angles[0].alpha, 0.0, 1e-12);
  EXPECT_THROW(project_to_camera_angles(m, Pose2D(), Extrinsics(), 50, 0.0), DomainError);
  EXPECT_THROW(project_to_camera_angles(m, Pose2D(), Extrinsics(), 50, 7.0), DomainError);
}

TEST(ProjectToCamera, RigidMotionInvariance) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Landmark> lms;
    for (int i = 0; i < 30; ++i) lms.push_back({i, {u(rng), u(rng)}});
    const Pose2D pose(u(rng), u(rng), ang(rng));
    const Extrinsics cam(1.2, 0.1, ang(rng));

    const Pose2D motion(u(rng), u(rng), ang(rng));
    std::vector<Landmark> moved;
    for (const auto& l : lms) moved.push_back({l.id, transform_from_frame(l.position, motion)});
    const Pose2D moved_pose(transform_from_frame(pose.position(), motion).x(),
                            transform_from_frame(pose.position(), motion).y(),
                            pose.theta + motion.theta);

    const auto a = project_to_camera_angles(PoleMap(lms), pose, cam, 45, 2.2);
    const auto b = project_to_camera_angles(PoleMap(moved), moved_pose, cam, 45, 2.2);
    // Landmarks sitting exactly on a boundary could flip; random data avoids that.
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a[i].id, b[i].id);
      ASSERT_NEAR(angular_diff(a[i].alpha, b[i].alpha), 0.0, 1e-9);
    }
  }
}

TEST(PoleMapCsv, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "poleloc_map_roundtrip.csv";
  PoleMap m({{3, {1.25, -7.5}}, {1, {0.1, 1e5}}});
  save_pole_map_csv(m, path);
  const PoleMap back = load_pole_map_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.landmarks()[0].position, m.landmarks()[0].position);
  EXPECT_EQ(back.landmarks()[1].position, m.landmarks()[1].position);
  std::filesystem::remove(path);
}

TEST(PoleMapCsv, BadHeaderIsConfigError) {
  const auto path = std::filesystem::temp_directory_path() / "poleloc_map_bad.csv";
  std::ofstream(path) << "id,x,y\n1,0,0\n";
  EXPECT_THROW(load_pole_map_csv(path), ConfigError);
  std::filesystem::remove(path);
}
