#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poleloc/error.hpp"
#include "poleloc/pipeline.hpp"
#include "poleloc/simulator.hpp"

using namespace poleloc;
namespace fs = std::filesystem;

namespace {

Scenario short_scenario(std::uint64_t seed) {
  Scenario s = compiegne_mini();
  s.trajectory.segments = {{200.0, 0.0, 0.0}};
  s.seed = seed;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Combination, ClosedSet) {
  for (auto c : kAllCombinations) EXPECT_EQ(parse_combination(combination_name(c)), c);
  EXPECT_EQ(parse_combination("all_cameras"), SensorCombination::kAllCameras);
  EXPECT_EQ(combination_label(SensorCombination::kGnssDr), "GNSS+DR");
  EXPECT_THROW(parse_combination("radar"), ConfigError);
  EXPECT_THROW(parse_combination(""), ConfigError);
}

TEST(RunPipeline, DeterministicSummary) {
  const Scenario s = short_scenario(3);
  const RunOptions opt{SensorCombination::kLidarCameras, true};
  const std::string a = summary_json(run_pipeline(s, simulate(s), opt));
  const std::string b = summary_json(run_pipeline(s, simulate(s), opt));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"rms_m\""), std::string::npos);
}

TEST(RunPipeline, NoiselessConvergesToTruth) {
  Scenario s = short_scenario(1);
  s.gnss.sigma = 1e-4;
  s.odometry.wheel_sigma = 1e-4;
  s.odometry.gyro_sigma = 1e-5;
  s.lidar.mode = LidarMode::kIdeal;
  s.lidar.ideal_sigma = 1e-4;
  s.lidar.clutter.enabled = false;
  const auto r = run_pipeline(s, simulate(s), {SensorCombination::kLidar, true});
  ASSERT_FALSE(r.errors.empty());
  EXPECT_LT(r.errors.back().position, 0.01);
  EXPECT_LT((r.final_bias - r.true_bias).norm(), 0.01);
}

TEST(RunPipeline, RecordsUpdateOrder) {
  const Scenario s = short_scenario(2);
  const auto r = run_pipeline(s, simulate(s), {SensorCombination::kAllCameras, true});
  EXPECT_EQ(r.update_order, (std::vector<std::string>{"wheels", "gyro", "gnss", "camera/front",
                                                       "camera/left", "camera/right"}));
  EXPECT_EQ(r.totals[kLidarSlot].accepted, 0);
  EXPECT_GT(r.totals[kFrontCam].accepted, 0);
  EXPECT_GT(r.totals[kLeftCam].accepted + r.totals[kRightCam].accepted, 0);
}

TEST(RunPipeline, GnssOnlyUsesNoExteroception) {
  const Scenario s = short_scenario(2);
  const auto r = run_pipeline(s, simulate(s), {SensorCombination::kGnssDr, true});
  for (int slot : {int(kLidarSlot), int(kFrontCam), int(kLeftCam), int(kRightCam)}) {
    EXPECT_EQ(r.totals[slot].accepted + r.totals[slot].rejected, 0) << slot_name(slot);
  }
  EXPECT_GT(r.totals[kGnss].accepted, 0);
}

TEST(WriteRunArtifacts, Files) {
  const Scenario s = short_scenario(4);
  const auto r = run_pipeline(s, simulate(s), {SensorCombination::kFront, true});
  const auto dir = fresh_dir("poleloc_artifacts");
  write_run_artifacts(r, dir);
  for (const char* f : {"trace.csv", "errors.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(j.at("sensors"), "front");
  EXPECT_EQ(j.at("scenario"), s.name);
  EXPECT_DOUBLE_EQ(j.at("rms_m").get<double>(), r.summary.rms);
  fs::remove_all(dir);
}

TEST(CompareRuns, SingleRunIsAnError) {
  const Scenario s = short_scenario(5);
  const auto dir = fresh_dir("poleloc_cmp_single");
  write_run_artifacts(run_pipeline(s, simulate(s), {SensorCombination::kGnssDr, true}), dir);
  EXPECT_THROW(compare_runs({dir}), ConfigError);
  EXPECT_THROW(compare_runs({dir, dir}), ConfigError);  // duplicate cell
  EXPECT_THROW(compare_runs({dir, fresh_dir("poleloc_cmp_missing")}), ConfigError);
  fs::remove_all(dir);
}

TEST(CompareRuns, ScenarioMismatch) {
  Scenario a = short_scenario(5);
  Scenario b = a;
  b.name = "other";
  const auto da = fresh_dir("poleloc_cmp_a");
  const auto db = fresh_dir("poleloc_cmp_b");
  write_run_artifacts(run_pipeline(a, simulate(a), {SensorCombination::kGnssDr, true}), da);
  write_run_artifacts(run_pipeline(b, simulate(b), {SensorCombination::kFront, true}), db);
  EXPECT_THROW(compare_runs({da, db}), ConfigError);
  fs::remove_all(da);
  fs::remove_all(db);
}

TEST(CompareRuns, FiveColumnsAndBest) {
  const Scenario s = short_scenario(6);
  const SensorLog log = simulate(s);
  const std::vector<SensorCombination> combos = {
      SensorCombination::kGnssDr, SensorCombination::kFront, SensorCombination::kLeftRight,
      SensorCombination::kAllCameras, SensorCombination::kLidar};
  std::vector<fs::path> dirs;
  for (auto c : combos) {
    dirs.push_back(fresh_dir("poleloc_cmp_" + std::string(combination_name(c))));
    write_run_artifacts(run_pipeline(s, log, {c, true}), dirs.back());
  }
  const auto before = slurp(dirs[0] / "summary.json");
  const auto table = compare_runs(dirs);
  EXPECT_EQ(before, slurp(dirs[0] / "summary.json"));  // read-only
  EXPECT_EQ(table.columns, combos);
  ASSERT_EQ(table.rows.size(), 1u);
  ASSERT_EQ(table.rows[0].rms.size(), 5u);

  // Argmin recomputed from the summaries on disk.
  std::size_t argmin = 0;
  double best = 1e300;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double v = nlohmann::json::parse(slurp(dirs[i] / "summary.json")).at("rms_m");
    ASSERT_EQ(*table.rows[0].rms[i], v);
    if (v < best) {
      best = v;
      argmin = i;
    }
  }
  EXPECT_EQ(table.rows[0].best, argmin);
  const std::string text = format_comparison(table);
  EXPECT_NE(text.find('*'), std::string::npos);
  EXPECT_NE(text.find("LiDAR"), std::string::npos);
  for (const auto& d : dirs) fs::remove_all(d);
}
