// Command-line runner: simulate scenarios, replay sensor combinations through
// the filter, and tabulate runs. Talks to the library only through the C API.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "poleloc/poleloc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitFailure = 1;

struct ScenarioDeleter {
  void operator()(pl_scenario* s) const { pl_scenario_free(s); }
};
struct LogDeleter {
  void operator()(pl_log* l) const { pl_log_free(l); }
};
using ScenarioPtr = std::unique_ptr<pl_scenario, ScenarioDeleter>;
using LogPtr = std::unique_ptr<pl_log, LogDeleter>;

int report(pl_status st) {
  switch (st) {
    case PL_OK: return kExitOk;
    case PL_ERR_NUMERICAL:
      std::fprintf(stderr, "error: numerical failure at t=%.6f s: %s\n", pl_last_error_timestamp(),
                   pl_last_error());
      return kExitNumerical;
    case PL_ERR_CONFIG:
    case PL_ERR_INVALID_ARGUMENT:
      std::fprintf(stderr, "error: %s\n", pl_last_error());
      return kExitConfig;
    default:
      std::fprintf(stderr, "error: %s\n", pl_last_error());
      return kExitFailure;
  }
}

int load_scenario(const std::string& name, std::optional<std::uint64_t> seed, ScenarioPtr& out) {
  pl_scenario* raw = nullptr;
  // Unreadable or malformed scenarios are configuration errors.
  pl_status st = pl_scenario_load(name.c_str(), &raw);
  if (st == PL_ERR_IO) st = PL_ERR_CONFIG;
  if (st != PL_OK) return report(st);
  out.reset(raw);
  if (seed) return report(pl_scenario_set_seed(out.get(), *seed));
  return kExitOk;
}

struct RunArgs {
  std::string scenario;
  std::string sensors;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool no_gating = false;
  std::string log_dir;
};

int cmd_run(const RunArgs& a) {
  ScenarioPtr sc;
  if (int rc = load_scenario(a.scenario, a.seed, sc)) return rc;
  LogPtr log;
  if (!a.log_dir.empty()) {
    pl_log* raw = nullptr;
    if (pl_status st = pl_log_load(a.log_dir.c_str(), &raw); st != PL_OK) {
      return report(st == PL_ERR_IO ? PL_ERR_CONFIG : st);
    }
    log.reset(raw);
  }
  pl_run_summary s{};
  const pl_status st =
      pl_run(sc.get(), log.get(), a.sensors.c_str(), a.no_gating ? 0 : 1, a.out.c_str(), &s);
  if (st != PL_OK) return report(st);
  std::printf("%s: rms %.3f m, median |CT| %.3f m, median |AT| %.3f m, bias (%.2f, %.2f) m\n",
              a.sensors.c_str(), s.rms_m, s.median_abs_cross_track_m, s.median_abs_along_track_m,
              s.final_bias_x, s.final_bias_y);
  return kExitOk;
}

int cmd_simulate(const std::string& scenario, std::optional<std::uint64_t> seed,
                 const std::string& out) {
  ScenarioPtr sc;
  if (int rc = load_scenario(scenario, seed, sc)) return rc;
  pl_log* raw = nullptr;
  if (pl_status st = pl_simulate(sc.get(), &raw); st != PL_OK) return report(st);
  LogPtr log(raw);
  return report(pl_log_write(log.get(), out.c_str()));
}

int cmd_compare(const std::vector<std::string>& dirs) {
  std::vector<const char*> ptrs;
  for (const auto& d : dirs) ptrs.push_back(d.c_str());
  size_t needed = 0;
  pl_status st = pl_compare(ptrs.data(), ptrs.size(), nullptr, 0, &needed);
  if (st != PL_ERR_BUFFER_TOO_SMALL) return report(st == PL_OK ? PL_ERR_INTERNAL : st);
  std::string buf(needed, '\0');
  st = pl_compare(ptrs.data(), ptrs.size(), buf.data(), buf.size(), &needed);
  if (st != PL_OK) return report(st);
  std::fputs(buf.c_str(), stdout);
  return kExitOk;
}

int cmd_detect(const std::string& cloud) {
  size_t count = 0;
  pl_status st = pl_detect_poles_csv(cloud.c_str(), nullptr, 0, &count);
  if (st != PL_OK && st != PL_ERR_BUFFER_TOO_SMALL) return report(st);
  std::vector<double> xy(2 * count);
  st = pl_detect_poles_csv(cloud.c_str(), xy.data(), count, &count);
  if (st != PL_OK) return report(st);
  std::printf("x,y\n");
  for (size_t i = 0; i < count; ++i) std::printf("%.6f,%.6f\n", xy[2 * i], xy[2 * i + 1]);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pole-based vehicle localization: simulation, filtering and evaluation"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Replay one sensor combination through the filter");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file or built-in name")
      ->required();
  run_cmd->add_option("--sensors", run.sensors,
                      "gnss_dr | front | left_right | all_cameras | lidar | lidar_cameras")
      ->required();
  run_cmd->add_option("--out", run.out, "Output directory for trace, errors and summary")
      ->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_flag("--no-gating", run.no_gating, "Disable association and innovation gates");
  run_cmd->add_option("--log", run.log_dir, "Replay a recorded sensor log instead of simulating");

  std::string sim_scenario, sim_out;
  std::optional<std::uint64_t> sim_seed;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic sensor log");
  sim_cmd->add_option("--scenario", sim_scenario, "Scenario JSON file or built-in name")
      ->required();
  sim_cmd->add_option("--out", sim_out, "Log directory")->required();
  sim_cmd->add_option("--seed", sim_seed, "Override the scenario seed");

  std::vector<std::string> cmp_dirs;
  auto* cmp_cmd = app.add_subcommand("compare", "Tabulate RMS over completed runs");
  cmp_cmd->add_option("dirs", cmp_dirs, "Run directories")->required();

  std::string cloud;
  auto* det_cmd = app.add_subcommand("detect-poles", "Detect poles in an x,y,z point cloud");
  det_cmd->add_option("--cloud", cloud, "Point cloud CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) return cmd_run(run);
  if (*sim_cmd) return cmd_simulate(sim_scenario, sim_seed, sim_out);
  if (*cmp_cmd) return cmd_compare(cmp_dirs);
  if (*det_cmd) return cmd_detect(cloud);
  return kExitConfig;
}
