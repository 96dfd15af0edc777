#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "poleloc/camera_bearing.hpp"
#include "poleloc/geometry.hpp"
#include "poleloc/lidar_detection.hpp"
#include "poleloc/pole_map.hpp"

namespace poleloc {

inline constexpr int kSensorLogSchemaVersion = 1;

struct TruthSample {
  double t = 0.0;
  Pose2D pose;
  double speed = 0.0;
  double yaw_rate = 0.0;
};

struct GnssFix {
  double t = 0.0;
  Vec2 z = Vec2::Zero();
};

struct WheelSample {
  double t = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct GyroSample {
  double t = 0.0;
  double rate = 0.0;
};

/// A sweep holds either a raw cloud or pre-extracted detections.
struct LidarFrame {
  std::int64_t frame_id = 0;
  double t = 0.0;
  bool has_cloud = false;
  PointCloud cloud;
  PoleDetectionSet detections;
};

struct CameraFrame {
  std::int64_t frame_id = 0;
  int camera_id = 0;
  double t = 0.0;
  PixelDetectionSet detections;
};

struct SensorLog {
  std::string scenario;
  std::uint64_t seed = 0;
  Vec2 true_bias = Vec2::Zero();
  PoleMap map;
  std::vector<TruthSample> truth;
  std::vector<GnssFix> gnss;
  std::vector<WheelSample> wheels;
  std::vector<GyroSample> gyro;
  std::vector<LidarFrame> lidar;
  std::vector<CameraFrame> cameras;  // all cameras, ordered by (t, camera_id)
};

/// Directory of per-stream CSV files plus manifest.json.
void write_sensor_log(const SensorLog& log, const std::filesystem::path& dir);
SensorLog read_sensor_log(const std::filesystem::path& dir);

/// Camera detection CSV: `frame_id,camera_id,u,v,score`.
void write_camera_detections_csv(const std::vector<CameraFrame>& frames,
                                 const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace poleloc
