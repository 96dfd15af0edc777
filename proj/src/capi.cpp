#include "poleloc/poleloc.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "poleloc/association.hpp"
#include "poleloc/error.hpp"
#include "poleloc/geometry.hpp"
#include "poleloc/lidar_detection.hpp"
#include "poleloc/metrics.hpp"
#include "poleloc/pipeline.hpp"
#include "poleloc/pole_map.hpp"
#include "poleloc/scenario.hpp"
#include "poleloc/simulator.hpp"

struct pl_map {
  poleloc::PoleMap map;
};

struct pl_scenario {
  poleloc::Scenario scenario;
};

struct pl_log {
  poleloc::SensorLog log;
};

namespace {

thread_local std::string g_last_error;
thread_local double g_last_timestamp = std::nan("");

pl_status fail(pl_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

pl_status from_code(poleloc::ErrorCode c) {
  using poleloc::ErrorCode;
  switch (c) {
    case ErrorCode::kInvalidArgument: return PL_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDomain: return PL_ERR_DOMAIN;
    case ErrorCode::kIo: return PL_ERR_IO;
    case ErrorCode::kConfig: return PL_ERR_CONFIG;
    case ErrorCode::kNumerical: return PL_ERR_NUMERICAL;
    case ErrorCode::kNoGroundFound: return PL_ERR_NO_GROUND;
    case ErrorCode::kInsufficientPoints: return PL_ERR_INSUFFICIENT_POINTS;
  }
  return PL_ERR_INTERNAL;
}

// Every entry point funnels exceptions through here; nothing escapes the C
// boundary.
template <typename F>
pl_status guard(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const poleloc::NumericalError& e) {
    g_last_timestamp = e.timestamp();
    return fail(PL_ERR_NUMERICAL, e.what());
  } catch (const poleloc::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PL_ERR_INTERNAL, "unknown error");
  }
}

#define PL_REQUIRE(cond) \
  if (!(cond)) return fail(PL_ERR_INVALID_ARGUMENT, "invalid argument: " #cond)

}  // namespace

extern "C" {

const char* pl_last_error(void) { return g_last_error.c_str(); }
double pl_last_error_timestamp(void) { return g_last_timestamp; }
const char* pl_version(void) { return "0.1.0"; }

pl_status pl_wrap_angle(double angle, double* out) {
  return guard([&] {
    PL_REQUIRE(out);
    *out = poleloc::wrap_angle(angle);
    return PL_OK;
  });
}

pl_status pl_angular_diff(double m, double y, double* out) {
  return guard([&] {
    PL_REQUIRE(out);
    *out = poleloc::angular_diff(m, y);
    return PL_OK;
  });
}

pl_status pl_map_create(const int64_t* ids, const double* xy, size_t count, pl_map** out) {
  return guard([&] {
    PL_REQUIRE(out);
    PL_REQUIRE(count == 0 || (ids && xy));
    std::vector<poleloc::Landmark> lms;
    lms.reserve(count);
    for (size_t i = 0; i < count; ++i) lms.push_back({ids[i], {xy[2 * i], xy[2 * i + 1]}});
    *out = new pl_map{poleloc::PoleMap(std::move(lms))};
    return PL_OK;
  });
}

pl_status pl_map_load_csv(const char* path, pl_map** out) {
  return guard([&] {
    PL_REQUIRE(path && out);
    *out = new pl_map{poleloc::load_pole_map_csv(path)};
    return PL_OK;
  });
}

void pl_map_free(pl_map* map) { delete map; }

size_t pl_map_size(const pl_map* map) { return map ? map->map.size() : 0; }

pl_status pl_map_query_radius(const pl_map* map, double x, double y, double radius, int64_t* ids,
                              size_t capacity, size_t* count) {
  return guard([&] {
    PL_REQUIRE(map && count);
    PL_REQUIRE(capacity == 0 || ids);
    const auto found = map->map.query_radius({x, y}, radius);
    *count = found.size();
    for (size_t i = 0; i < found.size() && i < capacity; ++i) ids[i] = found[i].id;
    return found.size() > capacity ? fail(PL_ERR_BUFFER_TOO_SMALL, "id buffer too small") : PL_OK;
  });
}

pl_status pl_hungarian(const double* costs, size_t rows, size_t cols, int64_t* row_to_col,
                       double* total) {
  return guard([&] {
    PL_REQUIRE(rows * cols == 0 || costs);
    PL_REQUIRE(rows == 0 || row_to_col);
    poleloc::CostMatrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) m(r, c) = costs[r * cols + c];
    }
    const auto a = poleloc::hungarian_solve(m);
    for (size_t r = 0; r < rows; ++r) {
      row_to_col[r] = a.row_to_col[r] ? static_cast<int64_t>(*a.row_to_col[r]) : -1;
    }
    if (total) *total = a.total;
    return PL_OK;
  });
}

pl_status pl_detect_poles_csv(const char* path, double* xy, size_t capacity, size_t* count) {
  return guard([&] {
    PL_REQUIRE(path && count);
    PL_REQUIRE(capacity == 0 || xy);
    const auto cloud = poleloc::load_point_cloud_csv(path);
    const auto dets = poleloc::detect_poles(cloud, poleloc::DetectorParams{});
    *count = dets.size();
    for (size_t i = 0; i < dets.size() && i < capacity; ++i) {
      xy[2 * i] = dets[i].position.x();
      xy[2 * i + 1] = dets[i].position.y();
    }
    return dets.size() > capacity ? fail(PL_ERR_BUFFER_TOO_SMALL, "detection buffer too small")
                                  : PL_OK;
  });
}

pl_status pl_scenario_load(const char* path_or_name, pl_scenario** out) {
  return guard([&] {
    PL_REQUIRE(path_or_name && out);
    *out = new pl_scenario{poleloc::load_scenario(path_or_name)};
    return PL_OK;
  });
}

void pl_scenario_free(pl_scenario* scenario) { delete scenario; }

pl_status pl_scenario_set_seed(pl_scenario* scenario, uint64_t seed) {
  return guard([&] {
    PL_REQUIRE(scenario);
    scenario->scenario.seed = seed;
    return PL_OK;
  });
}

pl_status pl_simulate(const pl_scenario* scenario, pl_log** out) {
  return guard([&] {
    PL_REQUIRE(scenario && out);
    *out = new pl_log{poleloc::simulate(scenario->scenario)};
    return PL_OK;
  });
}

pl_status pl_log_load(const char* dir, pl_log** out) {
  return guard([&] {
    PL_REQUIRE(dir && out);
    *out = new pl_log{poleloc::read_sensor_log(dir)};
    return PL_OK;
  });
}

pl_status pl_log_write(const pl_log* log, const char* dir) {
  return guard([&] {
    PL_REQUIRE(log && dir);
    poleloc::write_sensor_log(log->log, dir);
    return PL_OK;
  });
}

void pl_log_free(pl_log* log) { delete log; }

pl_status pl_run(const pl_scenario* scenario, const pl_log* log, const char* sensors, int gating,
                 const char* out_dir, pl_run_summary* summary) {
  return guard([&] {
    PL_REQUIRE(scenario && sensors);
    poleloc::RunOptions opt;
    opt.sensors = poleloc::parse_combination(sensors);
    opt.gating = gating != 0;
    poleloc::SensorLog simulated;
    if (!log) simulated = poleloc::simulate(scenario->scenario);
    const auto result =
        poleloc::run_pipeline(scenario->scenario, log ? log->log : simulated, opt);
    if (out_dir) poleloc::write_run_artifacts(result, out_dir);
    if (summary) {
      const auto& s = result.summary;
      summary->rms_m = s.rms;
      summary->median_abs_cross_track_m = s.cross_track.abs_quartiles.median;
      summary->median_abs_along_track_m = s.along_track.abs_quartiles.median;
      summary->heading_rms_rad = s.heading_rms;
      summary->nees_consistency = s.nees_consistency;
      summary->final_bias_x = result.final_bias.x();
      summary->final_bias_y = result.final_bias.y();
      summary->true_bias_x = result.true_bias.x();
      summary->true_bias_y = result.true_bias.y();
      summary->samples = s.samples;
    }
    return PL_OK;
  });
}

pl_status pl_compare(const char* const* run_dirs, size_t count, char* buffer, size_t capacity,
                     size_t* needed) {
  return guard([&] {
    PL_REQUIRE(count == 0 || run_dirs);
    std::vector<std::filesystem::path> dirs;
    for (size_t i = 0; i < count; ++i) {
      PL_REQUIRE(run_dirs[i]);
      dirs.emplace_back(run_dirs[i]);
    }
    const std::string text = poleloc::format_comparison(poleloc::compare_runs(dirs));
    if (needed) *needed = text.size() + 1;
    if (!buffer || capacity < text.size() + 1) {
      return fail(PL_ERR_BUFFER_TOO_SMALL, "output buffer too small");
    }
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    return PL_OK;
  });
}

}  // extern "C"
