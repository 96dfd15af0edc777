#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "poleloc/geometry.hpp"

namespace poleloc {

using Vec3 = Eigen::Vector3d;

/// LiDAR returns in the sensor frame L (meters).
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct Cluster {
  std::vector<std::size_t> indices;

  // Filled by pca_features().
  Vec3 eigenvalues = Vec3::Zero();  // descending, >= 0
  Vec3 principal = Vec3::UnitZ();   // v1, unit length
  double linearity = 0.0;           // (l1 - l2) / l1
  double orientation = 0.0;         // angle between v1 and z, folded to [0, pi/2]
  double height = 0.0;              // max z - min z
  double thickness = 0.0;           // horizontal diameter about the centroid axis
  Vec2 centroid_2d = Vec2::Zero();
};

/// Pole acceptance thresholds. All comparisons are strict.
struct PoleGate {
  double l_min = 0.9;
  double beta_max = 0.25;  // rad
  double h_min = 1.0;      // m
  double t_max = 0.6;      // m
};

struct GroundParams {
  double seed_height = 0.3;   // m above the lowest-point representative
  double plane_tol = 0.1;     // m
  int iterations = 3;
  std::size_t num_lowest = 20;
};

struct ClusterParams {
  double link_radius = 0.5;  // m
  std::size_t min_points = 5;
};

struct DetectorParams {
  GroundParams ground;
  ClusterParams cluster;
  PoleGate gate;
  double sigma = 0.15;  // m, isotropic std of each detection
};

struct PoleDetection {
  Vec2 position = Vec2::Zero();  // frame L
  Mat2 covariance = Mat2::Identity();
};

using PoleDetectionSet = std::vector<PoleDetection>;

struct GroundSplit {
  std::vector<std::size_t> ground;
  std::vector<std::size_t> non_ground;
  Vec3 normal = Vec3::UnitZ();  // upward unit normal of the fitted plane
  double offset = 0.0;          // plane: normal . p + offset = 0
};

/// Iterative plane fit: seed with points close to the lowest returns, fit a
/// least-squares plane, re-select inliers within plane_tol, repeat.
/// Throws Error(kNoGroundFound) when fewer than three seeds exist or the
/// plane is steeper than 30 degrees.
GroundSplit remove_ground(const PointCloud& cloud, const GroundParams& params);

/// Connected components of the "distance <= link_radius" graph over the
/// given subset. Components smaller than min_points are dropped. Clusters
/// come out ordered by their smallest point index; indices are ascending.
std::vector<Cluster> cluster_euclidean(const PointCloud& cloud,
                                       std::span<const std::size_t> subset,
                                       const ClusterParams& params);

/// Fills the PCA features of `cluster`. Throws Error(kInsufficientPoints)
/// for fewer than three points.
void pca_features(const PointCloud& cloud, Cluster& cluster);

bool classify_pole(const Cluster& cluster, const PoleGate& gate);

/// remove_ground -> cluster_euclidean -> pca_features -> classify_pole.
/// A missing ground plane is logged and all points are clustered.
PoleDetectionSet detect_poles(const PointCloud& cloud, const DetectorParams& params);

/// CSV with header `x,y,z`.
PointCloud load_point_cloud_csv(const std::filesystem::path& path);

}  // namespace poleloc
