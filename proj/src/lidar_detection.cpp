#include "poleloc/lidar_detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "csv_util.hpp"
#include "poleloc/error.hpp"

namespace poleloc {
namespace {

struct PlaneFit {
  Vec3 normal;
  double offset;
};

PlaneFit fit_plane(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  Vec3 mean = Vec3::Zero();
  for (auto i : idx) mean += cloud.points[i];
  mean /= static_cast<double>(idx.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto i : idx) {
    const Vec3 d = cloud.points[i] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Vec3 n = es.eigenvectors().col(0);
  if (n.z() < 0.0) n = -n;
  return {n, -n.dot(mean)};
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(k.x);
    h = h * 1000003u ^ std::hash<std::int64_t>{}(k.y);
    h = h * 1000003u ^ std::hash<std::int64_t>{}(k.z);
    return h;
  }
};

}  // namespace

GroundSplit remove_ground(const PointCloud& cloud, const GroundParams& params) {
  const std::size_t n = cloud.size();
  if (n < 3) {
    throw Error(ErrorCode::kNoGroundFound, "remove_ground: fewer than 3 points");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cloud.points[a].z() < cloud.points[b].z();
  });
  const std::size_t lowest = std::max<std::size_t>(1, std::min(params.num_lowest, n));
  double lpr = 0.0;
  for (std::size_t i = 0; i < lowest; ++i) lpr += cloud.points[order[i]].z();
  lpr /= static_cast<double>(lowest);

  std::vector<std::size_t> ground;
  for (std::size_t i = 0; i < n; ++i) {
    if (cloud.points[i].z() < lpr + params.seed_height) ground.push_back(i);
  }
  if (ground.size() < 3) {
    throw Error(ErrorCode::kNoGroundFound, "remove_ground: fewer than 3 seed points");
  }

  PlaneFit plane{Vec3::UnitZ(), 0.0};
  const int iterations = std::max(1, params.iterations);
  for (int it = 0; it < iterations; ++it) {
    plane = fit_plane(cloud, ground);
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(plane.normal.dot(cloud.points[i]) + plane.offset) <= params.plane_tol) {
        next.push_back(i);
      }
    }
    if (next.size() < 3) {
      throw Error(ErrorCode::kNoGroundFound, "remove_ground: plane lost its support");
    }
    ground = std::move(next);
  }
  if (plane.normal.z() <= std::cos(30.0 * kPi / 180.0)) {
    throw Error(ErrorCode::kNoGroundFound, "remove_ground: fitted plane steeper than 30 deg");
  }

  GroundSplit split;
  split.normal = plane.normal;
  split.offset = plane.offset;
  split.ground = std::move(ground);
  std::vector<char> is_ground(n, 0);
  for (auto i : split.ground) is_ground[i] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_ground[i]) split.non_ground.push_back(i);
  }
  return split;
}

std::vector<Cluster> cluster_euclidean(const PointCloud& cloud,
                                       std::span<const std::size_t> subset,
                                       const ClusterParams& params) {
  if (!(params.link_radius > 0.0)) {
    throw DomainError("cluster_euclidean: link_radius must be positive");
  }
  const double r = params.link_radius;
  const double r2 = r * r;
  // Cell diagonal equals r, so points sharing a cell are always linked and
  // only neighbouring cells up to two steps away need pairwise checks.
  const double cell = r / std::sqrt(3.0);
  auto key_of = [&](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / cell)),
                   static_cast<std::int64_t>(std::floor(p.y() / cell)),
                   static_cast<std::int64_t>(std::floor(p.z() / cell))};
  };

  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  grid.reserve(subset.size());
  std::vector<CellKey> cells;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const CellKey c = key_of(cloud.points[subset[k]]);
    auto [it, inserted] = grid.try_emplace(c);
    if (inserted) cells.push_back(c);
    it->second.push_back(k);
  }

  DisjointSet sets(subset.size());
  for (const auto& [key, members] : grid) {
    for (std::size_t m = 1; m < members.size(); ++m) sets.unite(members[0], members[m]);
  }

  // Half of the 5x5x5 neighbourhood, skipping offsets whose closest points
  // are already farther apart than r.
  std::vector<CellKey> offsets;
  for (std::int64_t dx = -2; dx <= 2; ++dx) {
    for (std::int64_t dy = -2; dy <= 2; ++dy) {
      for (std::int64_t dz = -2; dz <= 2; ++dz) {
        const bool forward = dx > 0 || (dx == 0 && (dy > 0 || (dy == 0 && dz > 0)));
        if (!forward) continue;
        auto gap = [](std::int64_t d) {
          const double g = static_cast<double>(std::max<std::int64_t>(std::abs(d) - 1, 0));
          return g * g;
        };
        if ((gap(dx) + gap(dy) + gap(dz)) * cell * cell > r2) continue;
        offsets.push_back({dx, dy, dz});
      }
    }
  }

  for (const auto& c : cells) {
    const auto& a = grid.find(c)->second;
    for (const auto& o : offsets) {
      auto it = grid.find({c.x + o.x, c.y + o.y, c.z + o.z});
      if (it == grid.end()) continue;
      const auto& b = it->second;
      if (sets.find(a[0]) == sets.find(b[0])) continue;
      bool linked = false;
      for (auto i : a) {
        const Vec3& p = cloud.points[subset[i]];
        for (auto j : b) {
          if ((cloud.points[subset[j]] - p).squaredNorm() <= r2) {
            sets.unite(i, j);
            linked = true;
            break;
          }
        }
        if (linked) break;
      }
    }
  }

  std::unordered_map<std::size_t, std::size_t> root_to_cluster;
  std::vector<Cluster> clusters;
  // Sorted subset positions make the output order independent of input order.
  std::vector<std::size_t> by_index(subset.size());
  std::iota(by_index.begin(), by_index.end(), std::size_t{0});
  std::sort(by_index.begin(), by_index.end(),
            [&](std::size_t a, std::size_t b) { return subset[a] < subset[b]; });
  for (auto k : by_index) {
    const std::size_t root = sets.find(k);
    auto [it, inserted] = root_to_cluster.try_emplace(root, clusters.size());
    if (inserted) clusters.emplace_back();
    clusters[it->second].indices.push_back(subset[k]);
  }
  std::erase_if(clusters, [&](const Cluster& c) { return c.indices.size() < params.min_points; });
  return clusters;
}

void pca_features(const PointCloud& cloud, Cluster& cluster) {
  const auto& idx = cluster.indices;
  if (idx.size() < 3) {
    throw Error(ErrorCode::kInsufficientPoints, "pca_features: fewer than 3 points");
  }
  const double n = static_cast<double>(idx.size());
  Vec3 mean = Vec3::Zero();
  double zmin = cloud.points[idx.front()].z();
  double zmax = zmin;
  for (auto i : idx) {
    const Vec3& p = cloud.points[i];
    mean += p;
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  mean /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto i : idx) {
    const Vec3 d = cloud.points[i] - mean;
    cov += d * d.transpose();
  }
  cov /= n;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  // Eigen sorts ascending.
  for (int k = 0; k < 3; ++k) {
    cluster.eigenvalues[k] = std::max(0.0, es.eigenvalues()[2 - k]);
  }
  cluster.principal = es.eigenvectors().col(2).normalized();
  const double l1 = cluster.eigenvalues[0];
  cluster.linearity = l1 > 0.0 ? (l1 - cluster.eigenvalues[1]) / l1 : 0.0;
  cluster.orientation = std::acos(std::min(1.0, std::abs(cluster.principal.z())));
  cluster.height = zmax - zmin;
  cluster.centroid_2d = mean.head<2>();

  double rmax = 0.0;
  for (auto i : idx) {
    rmax = std::max(rmax, (cloud.points[i].head<2>() - cluster.centroid_2d).norm());
  }
  cluster.thickness = 2.0 * rmax;
}

bool classify_pole(const Cluster& c, const PoleGate& gate) {
  return c.linearity > gate.l_min && c.orientation < gate.beta_max &&
         c.height > gate.h_min && c.thickness < gate.t_max;
}

PoleDetectionSet detect_poles(const PointCloud& cloud, const DetectorParams& params) {
  PoleDetectionSet out;
  if (cloud.empty()) return out;

  std::vector<std::size_t> candidates;
  try {
    candidates = remove_ground(cloud, params.ground).non_ground;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoGroundFound) throw;
    spdlog::warn("detect_poles: {}; clustering all points", e.what());
    candidates.resize(cloud.size());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }

  const Mat2 cov = params.sigma * params.sigma * Mat2::Identity();
  for (auto& cluster : cluster_euclidean(cloud, candidates, params.cluster)) {
    if (cluster.indices.size() < 3) continue;
    pca_features(cloud, cluster);
    if (classify_pole(cluster, params.gate)) {
      out.push_back({cluster.centroid_2d, cov});
    }
  }
  return out;
}

PointCloud load_point_cloud_csv(const std::filesystem::path& path) {
  CsvReader reader(path, {"x", "y", "z"});
  PointCloud cloud;
  while (auto row = reader.next()) {
    Vec3 p(row->as_double(0), row->as_double(1), row->as_double(2));
    if (!p.allFinite()) {
      throw ConfigError(path.string() + ": non-finite point");
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace poleloc
