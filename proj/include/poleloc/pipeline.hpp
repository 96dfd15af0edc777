#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poleloc/filter.hpp"
#include "poleloc/metrics.hpp"
#include "poleloc/scenario.hpp"
#include "poleloc/sensor_log.hpp"

namespace poleloc {

enum class SensorCombination { kGnssDr, kFront, kLeftRight, kAllCameras, kLidar, kLidarCameras };

inline constexpr std::array<SensorCombination, 6> kAllCombinations = {
    SensorCombination::kGnssDr,     SensorCombination::kFront, SensorCombination::kLeftRight,
    SensorCombination::kAllCameras, SensorCombination::kLidar, SensorCombination::kLidarCameras};

/// Throws ConfigError for names outside the closed set.
SensorCombination parse_combination(std::string_view name);
std::string_view combination_name(SensorCombination c);   // "all_cameras"
std::string_view combination_label(SensorCombination c);  // "All cameras"

struct RunOptions {
  SensorCombination sensors = SensorCombination::kGnssDr;
  bool gating = true;  // association gates and innovation gate together
};

/// Sensor slots used for per-sensor statistics, in update order within a
/// timestamp.
enum SensorSlot : int { kWheels = 0, kGyro, kGnss, kLidarSlot, kFrontCam, kLeftCam, kRightCam };
inline constexpr int kSensorSlots = 7;
std::string_view slot_name(int slot);

struct TraceRow {
  double t = 0.0;
  Vec7 mean = Vec7::Zero();
  Vec7 variance = Vec7::Zero();
  double cov_xy = 0.0;
  std::array<UpdateReport, kSensorSlots> reports{};  // since the previous row
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  RunOptions options;
  std::vector<TraceRow> trace;
  std::vector<EstimateSample> estimates;
  ErrorSeries errors;
  ErrorSummary summary;
  Vec2 true_bias = Vec2::Zero();
  Vec2 final_bias = Vec2::Zero();
  Vec2 final_bias_sigma = Vec2::Zero();
  std::array<UpdateReport, kSensorSlots> totals{};
  int dropped_out_of_order = 0;
  std::vector<std::string> update_order;
};

/// Replays `log` through the filter with the selected sensors. Throws
/// NumericalError with the offending timestamp if the filter diverges.
RunResult run_pipeline(const Scenario& scenario, const SensorLog& log, const RunOptions& options);

/// Deterministic JSON text for the run summary.
std::string summary_json(const RunResult& result);

/// trace.csv, errors.csv and summary.json in `dir` (created if missing).
void write_run_artifacts(const RunResult& result, const std::filesystem::path& dir);

struct ComparisonRow {
  std::string label;  // scenario and seed
  std::vector<std::optional<double>> rms;  // one per column
  std::optional<std::size_t> best;
};

struct ComparisonTable {
  std::string scenario;
  std::vector<SensorCombination> columns;
  std::vector<ComparisonRow> rows;
};

/// Reads summary.json from each run directory. Throws ConfigError for fewer
/// than two runs, mismatched scenarios or duplicate cells.
ComparisonTable compare_runs(const std::vector<std::filesystem::path>& run_dirs);
std::string format_comparison(const ComparisonTable& table);

}  // namespace poleloc
