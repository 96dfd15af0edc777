#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "poleloc/camera_bearing.hpp"
#include "poleloc/filter.hpp"
#include "poleloc/geometry.hpp"
#include "poleloc/lidar_detection.hpp"
#include "poleloc/pole_map.hpp"

namespace poleloc {

inline constexpr int kScenarioSchemaVersion = 1;

/// Curvature ramps linearly from the previous value to `curvature` over the
/// first `transition` meters, then stays constant for the rest of `length`.
struct PathSegment {
  double length = 100.0;     // m
  double curvature = 0.0;    // 1/m, positive turns left
  double transition = 0.0;   // m
};

struct TrajectorySpec {
  double start_x = 0.0;
  double start_y = 0.0;
  double start_heading = 0.0;
  double initial_curvature = 0.0;
  double speed = 10.0;  // m/s
  double rate = 50.0;   // Hz, ground-truth output
  std::vector<PathSegment> segments;
};

/// Poles placed along the path at regular arc-length spacing, alternating
/// roadsides with the given share on the left.
struct PoleLayout {
  double first_at = 10.0;  // m of arc length
  double spacing = 20.0;
  double along_jitter = 3.0;
  double lateral_min = 4.0;
  double lateral_max = 7.0;
  double left_fraction = 0.6;
  double height_min = 3.0;
  double height_max = 6.0;
  double radius = 0.1;
  std::uint64_t seed = 7;  // layout is fixed per scenario, independent of the run seed
};

struct GnssConfig {
  double rate = 1.0;
  double sigma = 0.7;
  double bias_x = 1.5;
  double bias_y = -1.0;
  double lever_x = 1.0;
  double lever_y = 0.0;
};

struct OdometryConfig {
  double rate = 100.0;
  double wheel_sigma = 0.05;  // m/s
  double gyro_sigma = 0.005;  // rad/s
  double track = 1.5;         // m
};

/// Unmapped objects. Walls and bushes should be rejected by the pole gate,
/// posts look like poles and stress the association.
struct ClutterConfig {
  bool enabled = true;
  int walls = 6;
  int bushes = 10;
  int posts = 5;
  double lateral_min = 7.5;
  double lateral_max = 12.0;
  double min_pole_distance = 6.0;
};

enum class LidarMode { kCloud, kIdeal };

struct LidarConfig {
  LidarMode mode = LidarMode::kCloud;
  double rate = 10.0;
  double range = 30.0;
  Extrinsics mount{1.2, 0.0, 0.0};
  double mount_height = 1.8;
  int ground_points = 1500;
  double point_noise = 0.02;
  double points_per_m2 = 40000.0;  // surface density at 1 m range
  double ideal_sigma = 0.1;      // m, ideal-mode detection noise
  DetectorParams detector;
  ClutterConfig clutter;
};

struct CameraConfig {
  std::string name = "front";
  int id = 0;
  Extrinsics mount{1.5, 0.0, 0.0};
  PinholeIntrinsics intrinsics;
  double mount_height = 1.9;
  double rate = 10.0;
  double max_range = 40.0;
  double sigma_px = 3.0;
  double p_false_negative = 0.2;
  double false_positive_rate = 0.1;  // per frame
  double roof_false_positive_rate = 0.0;
  double min_score = 0.5;
  std::vector<PixelRect> exclusions;
};

struct FilterConfig {
  ProcessNoise process;
  double init_position_sigma = 10.0;
  double init_heading_sigma = 0.5;
  double init_speed_sigma = 5.0;
  double init_yaw_rate_sigma = 0.5;
  double init_bias_sigma = 3.0;
  double gate_probability = 0.99;
  double lidar_gate = 3.0;       // Mahalanobis distance
  double bearing_gate = 0.035;   // rad
  double bearing_max_heading_sigma = 0.015;  // rad, camera updates wait below this
  double candidate_radius = 50.0;
  double output_rate = 10.0;
  double out_of_order_tolerance = 0.05;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "compiegne-mini";
  std::uint64_t seed = 0;
  TrajectorySpec trajectory;
  PoleLayout poles;
  GnssConfig gnss;
  OdometryConfig odometry;
  LidarConfig lidar;
  std::vector<CameraConfig> cameras;
  FilterConfig filter;

  const CameraConfig* camera(const std::string& name) const;
};

/// 600 m urban section with one left curve, 30 roadside poles, biased GNSS,
/// a front camera and two 129-degree side cameras.
Scenario compiegne_mini();

/// Long gentle curve, no clutter, ideal LiDAR detections.
Scenario gentle_curve();

/// Throws ConfigError on invalid values.
void validate(const Scenario& s);

/// Accepts a JSON file path or a built-in scenario name.
Scenario load_scenario(const std::string& path_or_name);
Scenario parse_scenario_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);

}  // namespace poleloc
