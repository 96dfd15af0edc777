#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "poleloc/camera_bearing.hpp"
#include "poleloc/geometry.hpp"
#include "poleloc/pole_map.hpp"

namespace poleloc {

/// Dense row-major cost matrix; rows are measurements, columns candidates.
/// +infinity marks a pairing that is not allowed.
class CostMatrix {
 public:
  static constexpr double kForbidden = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  /// Column per row, nullopt when the row is unmatched.
  std::vector<std::optional<std::size_t>> row_to_col;
  std::vector<std::size_t> unmatched_cols;
  /// Sum of the matched entries, accumulated in row order.
  double total = 0.0;
};

/// Optimal assignment.
///
/// Maximizes the number of pairs over finite entries first, then minimizes
/// their summed cost. Non-square inputs are padded with dummy rows/columns.
/// Among equal-cost optima the row-to-column vector is lexicographically
/// smallest, with "unmatched" ranked after every column. Throws DomainError
/// on negative or NaN entries.
Assignment hungarian_solve(const CostMatrix& costs);

struct Match {
  std::size_t measurement = 0;
  LandmarkId landmark = 0;
  double cost = 0.0;
};

struct MatchSet {
  std::vector<Match> pairs;  // ascending measurement index
  std::vector<std::size_t> unmatched_measurements;
  std::vector<LandmarkId> unmatched_landmarks;
};

/// sqrt((m - y)^T R^-1 (m - y)). Throws Error(kNumerical) if R is not
/// positive definite.
double mahalanobis_cost(const Vec2& y, const Vec2& m, const Mat2& r);

/// Squared wrapped angular difference.
double bearing_cost(double y_alpha, double m_alpha);

/// Mahalanobis costs, entries above `gate` forbidden, then hungarian_solve.
/// Pass +infinity as gate to disable gating.
MatchSet gate_and_match_lidar(const std::vector<Vec2>& detections_world,
                              const std::vector<Landmark>& candidates,
                              const std::vector<Mat2>& covariances, double gate);

/// Squared angular costs, pairs with |delta| above `gate` forbidden, then
/// hungarian_solve. One call per camera per frame.
MatchSet gate_and_match_bearings(const BearingSet& bearings, const CameraAngleMap& map_angles,
                                 double gate);

}  // namespace poleloc
