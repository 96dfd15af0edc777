#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "poleloc/poleloc.h"

namespace fs = std::filesystem;

TEST(CApi, VersionAndAngles) {
  EXPECT_STREQ(pl_version(), "0.1.0");
  double out = 0.0;
  ASSERT_EQ(pl_wrap_angle(3.0 * M_PI / 2.0, &out), PL_OK);
  EXPECT_NEAR(out, -M_PI / 2.0, 1e-15);
  ASSERT_EQ(pl_angular_diff(-3.0, 3.0, &out), PL_OK);
  EXPECT_NEAR(out, -6.0 + 2.0 * M_PI, 1e-15);

  EXPECT_EQ(pl_wrap_angle(NAN, &out), PL_ERR_DOMAIN);
  EXPECT_NE(std::string(pl_last_error()), "");
  EXPECT_EQ(pl_wrap_angle(0.0, nullptr), PL_ERR_INVALID_ARGUMENT);
}

TEST(CApi, Map) {
  const int64_t ids[] = {1, 2};
  const double xy[] = {0, 0, 10, 0};
  pl_map* map = nullptr;
  ASSERT_EQ(pl_map_create(ids, xy, 2, &map), PL_OK);
  EXPECT_EQ(pl_map_size(map), 2u);

  int64_t found[2] = {0, 0};
  size_t count = 0;
  ASSERT_EQ(pl_map_query_radius(map, 0, 0, 5, found, 2, &count), PL_OK);
  ASSERT_EQ(count, 1u);
  EXPECT_EQ(found[0], 1);
  EXPECT_EQ(pl_map_query_radius(map, 0, 0, 100, found, 1, &count), PL_ERR_BUFFER_TOO_SMALL);
  EXPECT_EQ(count, 2u);
  EXPECT_EQ(pl_map_query_radius(map, 0, 0, -1, found, 2, &count), PL_ERR_DOMAIN);
  pl_map_free(map);

  const int64_t dup[] = {1, 1};
  EXPECT_EQ(pl_map_create(dup, xy, 2, &map), PL_ERR_CONFIG);
  EXPECT_EQ(pl_map_load_csv("/nonexistent/map.csv", &map), PL_ERR_IO);
  pl_map_free(nullptr);
}

TEST(CApi, Hungarian) {
  const double costs[] = {1, 2, 0.5, 10};
  int64_t assign[2] = {0, 0};
  double total = 0.0;
  ASSERT_EQ(pl_hungarian(costs, 2, 2, assign, &total), PL_OK);
  EXPECT_EQ(assign[0], 1);
  EXPECT_EQ(assign[1], 0);
  EXPECT_DOUBLE_EQ(total, 2.5);

  const double forbidden[] = {INFINITY, INFINITY};
  ASSERT_EQ(pl_hungarian(forbidden, 2, 1, assign, &total), PL_OK);
  EXPECT_EQ(assign[0], -1);
  EXPECT_EQ(assign[1], -1);

  const double negative[] = {-1.0};
  EXPECT_EQ(pl_hungarian(negative, 1, 1, assign, &total), PL_ERR_DOMAIN);
}

TEST(CApi, DetectPolesCsv) {
  const auto path = fs::temp_directory_path() / "poleloc_capi_cloud.csv";
  {
    std::ofstream f(path);
    f << "x,y,z\n";
    for (double x = -8; x <= 8; x += 0.4) {
      for (double y = -8; y <= 8; y += 0.4) f << x << ',' << y << ",0\n";
    }
    for (int i = 0; i < 200; ++i) {
      const double a = 0.1 * i;
      f << 4.0 + 0.1 * std::cos(a) << ',' << 2.0 + 0.1 * std::sin(a) << ',' << 0.3 + 0.015 * i
        << '\n';
    }
  }
  double xy[8];
  size_t count = 0;
  ASSERT_EQ(pl_detect_poles_csv(path.c_str(), xy, 4, &count), PL_OK) << pl_last_error();
  ASSERT_EQ(count, 1u);
  EXPECT_NEAR(xy[0], 4.0, 0.05);
  EXPECT_NEAR(xy[1], 2.0, 0.05);
  fs::remove(path);
}

TEST(CApi, ScenarioSimulateRunCompare) {
  pl_scenario* sc = nullptr;
  EXPECT_EQ(pl_scenario_load("no-such-scenario", &sc), PL_ERR_CONFIG);
  ASSERT_EQ(pl_scenario_load("gentle-curve", &sc), PL_OK) << pl_last_error();
  ASSERT_EQ(pl_scenario_set_seed(sc, 2), PL_OK);

  pl_log* log = nullptr;
  ASSERT_EQ(pl_simulate(sc, &log), PL_OK) << pl_last_error();
  const auto log_dir = fs::temp_directory_path() / "poleloc_capi_log";
  fs::remove_all(log_dir);
  ASSERT_EQ(pl_log_write(log, log_dir.c_str()), PL_OK) << pl_last_error();
  pl_log* loaded = nullptr;
  ASSERT_EQ(pl_log_load(log_dir.c_str(), &loaded), PL_OK) << pl_last_error();

  const auto run_a = fs::temp_directory_path() / "poleloc_capi_run_a";
  const auto run_b = fs::temp_directory_path() / "poleloc_capi_run_b";
  pl_run_summary lidar{}, gnss{};
  ASSERT_EQ(pl_run(sc, loaded, "lidar", 1, run_a.c_str(), &lidar), PL_OK) << pl_last_error();
  ASSERT_EQ(pl_run(sc, log, "gnss_dr", 1, run_b.c_str(), &gnss), PL_OK) << pl_last_error();
  EXPECT_GT(lidar.samples, 0u);
  EXPECT_LT(lidar.rms_m, gnss.rms_m);
  EXPECT_DOUBLE_EQ(lidar.true_bias_x, 0.5);
  EXPECT_DOUBLE_EQ(lidar.true_bias_y, -0.3);
  EXPECT_EQ(pl_run(sc, log, "radar", 1, nullptr, &gnss), PL_ERR_CONFIG);

  const char* dirs[] = {run_a.c_str(), run_b.c_str()};
  size_t needed = 0;
  EXPECT_EQ(pl_compare(dirs, 2, nullptr, 0, &needed), PL_ERR_BUFFER_TOO_SMALL);
  ASSERT_GT(needed, 1u);
  std::vector<char> buf(needed);
  ASSERT_EQ(pl_compare(dirs, 2, buf.data(), buf.size(), &needed), PL_OK);
  EXPECT_NE(std::string(buf.data()).find("LiDAR"), std::string::npos);
  EXPECT_EQ(pl_compare(dirs, 1, buf.data(), buf.size(), &needed), PL_ERR_CONFIG);

  pl_log_free(loaded);
  pl_log_free(log);
  pl_scenario_free(sc);
  fs::remove_all(log_dir);
  fs::remove_all(run_a);
  fs::remove_all(run_b);
}
