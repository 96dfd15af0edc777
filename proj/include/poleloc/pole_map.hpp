#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "poleloc/geometry.hpp"

namespace poleloc {

using LandmarkId = std::int64_t;

struct Landmark {
  LandmarkId id = 0;
  Vec2 position = Vec2::Zero();
};

/// Georeferenced, indistinguishable pole landmarks.
///
/// Storage is a flat list kept in id order; queries are linear scans, which
/// is adequate for the tens-to-hundreds of poles of a street-scale map. A
/// spatial index can be added behind query_radius without changing callers.
class PoleMap {
 public:
  PoleMap() = default;
  /// Throws ConfigError on duplicate ids or non-finite positions.
  explicit PoleMap(std::vector<Landmark> landmarks);

  const std::vector<Landmark>& landmarks() const { return landmarks_; }
  std::size_t size() const { return landmarks_.size(); }
  bool empty() const { return landmarks_.empty(); }

  /// nullptr if the id is unknown.
  const Landmark* find(LandmarkId id) const;

  /// Landmarks with distance <= radius from center, in id order.
  std::vector<Landmark> query_radius(const Vec2& center, double radius) const;

 private:
  std::vector<Landmark> landmarks_;
};

struct CameraAngle {
  LandmarkId id = 0;
  double alpha = 0.0;  // counter-clockwise from the optical axis, wrapped
};

using CameraAngleMap = std::vector<CameraAngle>;

/// Bearings of the landmarks a camera can see from `pose`: within `radius` of
/// the vehicle position, strictly in front of the camera, and within fov/2 of
/// its optical axis.
CameraAngleMap project_to_camera_angles(const PoleMap& map, const Pose2D& pose,
                                        const Extrinsics& cam, double radius,
                                        double fov);

/// CSV with header `id,east_m,north_m`.
PoleMap load_pole_map_csv(const std::filesystem::path& path);
void save_pole_map_csv(const PoleMap& map, const std::filesystem::path& path);

}  // namespace poleloc
