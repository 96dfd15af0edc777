/* C interface to the pole-based localization library. */
#ifndef POLELOC_POLELOC_H
#define POLELOC_POLELOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(POLELOC_BUILDING_SHARED)
#    define POLELOC_API __declspec(dllexport)
#  else
#    define POLELOC_API __declspec(dllimport)
#  endif
#else
#  define POLELOC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_INVALID_ARGUMENT = 1,
  PL_ERR_DOMAIN = 2,
  PL_ERR_IO = 3,
  PL_ERR_CONFIG = 4,
  PL_ERR_NUMERICAL = 5,
  PL_ERR_NO_GROUND = 6,
  PL_ERR_INSUFFICIENT_POINTS = 7,
  PL_ERR_BUFFER_TOO_SMALL = 8,
  PL_ERR_INTERNAL = 9
} pl_status;

typedef struct pl_map pl_map;
typedef struct pl_scenario pl_scenario;
typedef struct pl_log pl_log;

/* Message of the last failure on the calling thread, "" if none. */
POLELOC_API const char* pl_last_error(void);
/* Filter time of the last PL_ERR_NUMERICAL on the calling thread. */
POLELOC_API double pl_last_error_timestamp(void);
POLELOC_API const char* pl_version(void);

POLELOC_API pl_status pl_wrap_angle(double angle, double* out);
POLELOC_API pl_status pl_angular_diff(double m, double y, double* out);

/* Landmark ids and interleaved east/north coordinates. */
POLELOC_API pl_status pl_map_create(const int64_t* ids, const double* xy, size_t count,
                                    pl_map** out);
POLELOC_API pl_status pl_map_load_csv(const char* path, pl_map** out);
POLELOC_API void pl_map_free(pl_map* map);
POLELOC_API size_t pl_map_size(const pl_map* map);
/* Writes up to `capacity` ids; `count` receives the full match count. */
POLELOC_API pl_status pl_map_query_radius(const pl_map* map, double x, double y, double radius,
                                          int64_t* ids, size_t capacity, size_t* count);

/* Row-major cost matrix, +INFINITY forbids a pair. row_to_col[i] is -1 for
 * unmatched rows. */
POLELOC_API pl_status pl_hungarian(const double* costs, size_t rows, size_t cols,
                                   int64_t* row_to_col, double* total);

/* Runs the pole detector on an `x,y,z` CSV cloud with default parameters.
 * Writes interleaved x/y centroids in the sensor frame. */
POLELOC_API pl_status pl_detect_poles_csv(const char* path, double* xy, size_t capacity,
                                          size_t* count);

/* JSON file path or built-in name ("compiegne-mini", "gentle-curve"). */
POLELOC_API pl_status pl_scenario_load(const char* path_or_name, pl_scenario** out);
POLELOC_API void pl_scenario_free(pl_scenario* scenario);
POLELOC_API pl_status pl_scenario_set_seed(pl_scenario* scenario, uint64_t seed);

POLELOC_API pl_status pl_simulate(const pl_scenario* scenario, pl_log** out);
POLELOC_API pl_status pl_log_load(const char* dir, pl_log** out);
POLELOC_API pl_status pl_log_write(const pl_log* log, const char* dir);
POLELOC_API void pl_log_free(pl_log* log);

typedef struct pl_run_summary {
  double rms_m;
  double median_abs_cross_track_m;
  double median_abs_along_track_m;
  double heading_rms_rad;
  double nees_consistency;
  double final_bias_x;
  double final_bias_y;
  double true_bias_x;
  double true_bias_y;
  size_t samples;
} pl_run_summary;

/* `sensors` is one of gnss_dr, front, left_right, all_cameras, lidar,
 * lidar_cameras. `log` may be NULL to simulate from the scenario, `out_dir`
 * may be NULL to skip writing artifacts. */
POLELOC_API pl_status pl_run(const pl_scenario* scenario, const pl_log* log, const char* sensors,
                             int gating, const char* out_dir, pl_run_summary* summary);

/* Formats the comparison table of completed run directories into `buffer`.
 * `needed` receives the length including the terminating NUL. */
POLELOC_API pl_status pl_compare(const char* const* run_dirs, size_t count, char* buffer,
                                 size_t capacity, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* POLELOC_POLELOC_H */
