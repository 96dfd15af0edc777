#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "poleloc/scenario.hpp"
#include "poleloc/sensor_log.hpp"

namespace poleloc {

using Rng = std::mt19937_64;

/// Independent random stream per sensor, derived from the run seed and a
/// name, so switching one sensor on or off leaves the others' noise intact.
Rng make_stream(std::uint64_t seed, std::string_view name);

/// Arc-length parameterized path driven at constant speed.
class Trajectory {
 public:
  /// Throws ConfigError for degenerate specs.
  explicit Trajectory(const TrajectorySpec& spec);

  double length() const { return length_; }
  double duration() const { return length_ / spec_.speed; }
  double speed() const { return spec_.speed; }

  double curvature_at(double s) const;
  double heading_at(double s) const;
  Pose2D pose_at_arc(double s) const;
  TruthSample at(double t) const;

 private:
  struct SegmentStart {
    double s;
    double curvature_from;
    double heading;
  };
  struct Knot {
    double x, y;
  };

  std::size_t segment_index(double s) const;

  TrajectorySpec spec_;
  std::vector<SegmentStart> starts_;
  std::vector<Knot> knots_;  // one per meter of arc length
  double length_ = 0.0;
};

/// Ground-truth poses at spec.rate over the whole path.
std::vector<TruthSample> generate_trajectory(const TrajectorySpec& spec);

struct WorldPole {
  LandmarkId id = 0;
  Vec2 position = Vec2::Zero();
  double height = 4.0;
  double radius = 0.1;
};

enum class ClutterKind { kWall, kBush, kPost };

/// Oriented box standing on the ground.
struct ClutterObject {
  ClutterKind kind = ClutterKind::kWall;
  Vec2 center = Vec2::Zero();
  double yaw = 0.0;
  double half_length = 0.5;
  double half_width = 0.5;
  double height = 1.0;
};

struct World {
  PoleMap map;
  std::vector<WorldPole> poles;
  std::vector<ClutterObject> clutter;
};

PoleMap generate_pole_map(const Trajectory& path, const PoleLayout& layout,
                          std::vector<WorldPole>* poles = nullptr);

World build_world(const Trajectory& path, const Scenario& scenario, Rng& clutter_rng);

std::vector<GnssFix> synthesize_gnss(const Trajectory& path, const GnssConfig& cfg, Rng& rng);

struct OdometryStreams {
  std::vector<WheelSample> wheels;
  std::vector<GyroSample> gyro;
};

OdometryStreams synthesize_wheels_gyro(const Trajectory& path, const OdometryConfig& cfg,
                                       Rng& wheel_rng, Rng& gyro_rng);

/// One LiDAR sweep, in the sensor frame.
PointCloud synthesize_cloud(const Pose2D& vehicle, const World& world, const LidarConfig& cfg,
                            Rng& rng);

/// Ideal detector output: true pole (and post) positions plus Gaussian noise.
PoleDetectionSet synthesize_ideal_detections(const Pose2D& vehicle, const World& world,
                                             const LidarConfig& cfg, Rng& rng);

std::vector<LidarFrame> synthesize_lidar(const Trajectory& path, const World& world,
                                         const LidarConfig& cfg, Rng& rng);

/// Pole-base pixels for one image, with dropouts and spurious detections.
PixelDetectionSet synthesize_camera_frame(const Pose2D& vehicle, const World& world,
                                          const CameraConfig& cam, Rng& rng);

std::vector<CameraFrame> synthesize_camera(const Trajectory& path, const World& world,
                                           const CameraConfig& cam, Rng& rng);

/// Full synthetic log for a scenario with its seed.
SensorLog simulate(const Scenario& scenario);

}  // namespace poleloc
