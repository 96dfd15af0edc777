#include "poleloc/pole_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>

#include "poleloc/error.hpp"
#include "csv_util.hpp"

namespace poleloc {

PoleMap::PoleMap(std::vector<Landmark> landmarks) : landmarks_(std::move(landmarks)) {
  std::sort(landmarks_.begin(), landmarks_.end(),
            [](const Landmark& a, const Landmark& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < landmarks_.size(); ++i) {
    if (!landmarks_[i].position.allFinite()) {
      throw ConfigError("pole map: non-finite position for id " +
                        std::to_string(landmarks_[i].id));
    }
    if (i > 0 && landmarks_[i].id == landmarks_[i - 1].id) {
      throw ConfigError("pole map: duplicate id " + std::to_string(landmarks_[i].id));
    }
  }
}

const Landmark* PoleMap::find(LandmarkId id) const {
  auto it = std::lower_bound(landmarks_.begin(), landmarks_.end(), id,
                             [](const Landmark& l, LandmarkId v) { return l.id < v; });
  if (it == landmarks_.end() || it->id != id) {
    return nullptr;
  }
  return &*it;
}

std::vector<Landmark> PoleMap::query_radius(const Vec2& center, double radius) const {
  if (!(radius > 0.0)) {
    throw DomainError("query_radius: radius must be positive");
  }
  std::vector<Landmark> out;
  for (const auto& l : landmarks_) {
    if ((l.position - center).norm() <= radius) {
      out.push_back(l);
    }
  }
  return out;
}

CameraAngleMap project_to_camera_angles(const PoleMap& map, const Pose2D& pose,
                                        const Extrinsics& cam, double radius,
                                        double fov) {
  if (!(fov > 0.0) || fov > kTwoPi) {
    throw DomainError("project_to_camera_angles: fov must be in (0, 2pi]");
  }
  const Pose2D cam_pose = compose(pose, cam);
  CameraAngleMap out;
  for (const auto& l : map.query_radius(pose.position(), radius)) {
    const Vec2 q = transform_to_frame(l.position, cam_pose);
    const double alpha = std::atan2(q.y(), q.x());
    // A full-circle fov still cannot see points at or behind the image plane.
    if (q.x() <= 0.0 || std::abs(alpha) > 0.5 * fov) {
      continue;
    }
    out.push_back({l.id, wrap_angle(alpha)});
  }
  return out;
}

PoleMap load_pole_map_csv(const std::filesystem::path& path) {
  CsvReader reader(path, {"id", "east_m", "north_m"});
  std::vector<Landmark> landmarks;
  while (auto row = reader.next()) {
    landmarks.push_back({row->as_int(0), Vec2(row->as_double(1), row->as_double(2))});
  }
  return PoleMap(std::move(landmarks));
}

void save_pole_map_csv(const PoleMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "id,east_m,north_m\n" << std::setprecision(17);
  for (const auto& l : map.landmarks()) {
    out << l.id << ',' << l.position.x() << ',' << l.position.y() << '\n';
  }
}

}  // namespace poleloc
