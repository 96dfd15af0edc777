#include "poleloc/association.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Cholesky>

#include "poleloc/error.hpp"

namespace poleloc {
namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Square min-cost perfect matching (shortest augmenting paths with
// potentials). Returns col_of_row; u and v receive the final potentials.
std::vector<std::size_t> solve_square(const std::vector<double>& a, std::size_t n,
                                      std::vector<double>& u, std::vector<double>& v) {
  const double inf = std::numeric_limits<double>::infinity();
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  auto cost = [&](std::size_t i, std::size_t j) { return a[(i - 1) * n + (j - 1)]; };

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of_row(n, kNone);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace

Assignment hungarian_solve(const CostMatrix& costs) {
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  Assignment out;
  out.row_to_col.assign(rows, std::nullopt);
  if (rows == 0 || cols == 0) {
    for (std::size_t c = 0; c < cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  double max_finite = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = costs(r, c);
      if (std::isnan(x) || x < 0.0) {
        throw DomainError("hungarian_solve: costs must be non-negative");
      }
      if (std::isfinite(x)) max_finite = std::max(max_finite, x);
    }
  }

  // Forbidden and padding cells share one cost that exceeds any sum of real
  // entries, so the solver first maximizes the number of real pairs.
  const std::size_t n = std::max(rows, cols);
  const double big = max_finite > 0.0 ? 2.0 * static_cast<double>(n + 1) * max_finite : 1.0;
  std::vector<double> a(n * n, big);
  std::vector<char> real(n * n, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (std::isfinite(costs(r, c))) {
        a[r * n + c] = costs(r, c);
        real[r * n + c] = 1;
      }
    }
  }

  std::vector<double> u, v;
  std::vector<std::size_t> col_of_row = solve_square(a, n, u, v);
  std::vector<std::size_t> row_of_col(n);
  for (std::size_t r = 0; r < n; ++r) row_of_col[col_of_row[r]] = r;

  // Any perfect matching on zero-reduced-cost cells is optimal, so walk rows
  // in order and move each to the best-ranked tight column that still leaves
  // the remaining rows perfectly matchable.
  const double tol = 1e-12 * big;
  auto tight = [&](std::size_t r, std::size_t c) {
    return a[r * n + c] - u[r + 1] - v[c + 1] <= tol;
  };
  auto rank = [&](std::size_t r, std::size_t c) -> std::size_t {
    if (c < cols && real[r * n + c]) return c;
    if (c >= cols) return n + c;
    return 2 * n + c;
  };

  std::vector<char> fixed(n, 0);
  std::vector<char> visited(n, 0);
  std::function<bool(std::size_t, std::size_t, std::size_t)> augment =
      [&](std::size_t row, std::size_t target, std::size_t skip_row) -> bool {
    for (std::size_t c = 0; c < n; ++c) {
      if (visited[c] || !tight(row, c)) continue;
      visited[c] = 1;
      if (c == target) {
        col_of_row[row] = c;
        row_of_col[c] = row;
        return true;
      }
      const std::size_t owner = row_of_col[c];
      if (fixed[owner] || owner == skip_row) continue;
      if (augment(owner, target, skip_row)) {
        col_of_row[row] = c;
        row_of_col[c] = row;
        return true;
      }
    }
    return false;
  };

  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::size_t> order(n);
    for (std::size_t c = 0; c < n; ++c) order[c] = c;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return rank(r, x) < rank(r, y); });
    const std::size_t current = col_of_row[r];
    for (std::size_t c : order) {
      if (rank(r, c) >= rank(r, current)) break;
      if (!tight(r, c)) continue;
      const std::size_t owner = row_of_col[c];
      if (fixed[owner]) continue;
      std::fill(visited.begin(), visited.end(), 0);
      visited[c] = 1;
      if (augment(owner, current, r)) {
        col_of_row[r] = c;
        row_of_col[c] = r;
        break;
      }
    }
    fixed[r] = 1;
  }

  std::vector<char> col_used(cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = col_of_row[r];
    if (c < cols && real[r * n + c]) {
      out.row_to_col[r] = c;
      col_used[c] = 1;
      out.total += costs(r, c);
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

double mahalanobis_cost(const Vec2& y, const Vec2& m, const Mat2& r) {
  Eigen::LLT<Mat2> llt(r);
  if (llt.info() != Eigen::Success || !r.allFinite()) {
    throw Error(ErrorCode::kNumerical, "mahalanobis_cost: covariance not positive definite");
  }
  const Vec2 w = llt.matrixL().solve(m - y);
  return w.norm();
}

double bearing_cost(double y_alpha, double m_alpha) {
  const double d = angular_diff(m_alpha, y_alpha);
  return d * d;
}

namespace {

template <typename Ids>
MatchSet to_match_set(const Assignment& a, const CostMatrix& costs, const Ids& ids) {
  MatchSet out;
  for (std::size_t r = 0; r < a.row_to_col.size(); ++r) {
    if (a.row_to_col[r]) {
      out.pairs.push_back({r, ids[*a.row_to_col[r]], costs(r, *a.row_to_col[r])});
    } else {
      out.unmatched_measurements.push_back(r);
    }
  }
  for (auto c : a.unmatched_cols) out.unmatched_landmarks.push_back(ids[c]);
  return out;
}

}  // namespace

MatchSet gate_and_match_lidar(const std::vector<Vec2>& detections_world,
                              const std::vector<Landmark>& candidates,
                              const std::vector<Mat2>& covariances, double gate) {
  if (!(gate > 0.0)) {
    throw DomainError("gate_and_match_lidar: gate must be positive");
  }
  if (covariances.size() != detections_world.size()) {
    throw DomainError("gate_and_match_lidar: one covariance per detection required");
  }
  CostMatrix costs(detections_world.size(), candidates.size());
  std::vector<LandmarkId> ids;
  for (const auto& l : candidates) ids.push_back(l.id);
  for (std::size_t i = 0; i < detections_world.size(); ++i) {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const double d = mahalanobis_cost(detections_world[i], candidates[j].position, covariances[i]);
      costs(i, j) = d > gate ? CostMatrix::kForbidden : d;
    }
  }
  return to_match_set(hungarian_solve(costs), costs, ids);
}

MatchSet gate_and_match_bearings(const BearingSet& bearings, const CameraAngleMap& map_angles,
                                 double gate) {
  if (!(gate > 0.0)) {
    throw DomainError("gate_and_match_bearings: gate must be positive");
  }
  CostMatrix costs(bearings.bearings.size(), map_angles.size());
  std::vector<LandmarkId> ids;
  for (const auto& m : map_angles) ids.push_back(m.id);
  for (std::size_t i = 0; i < bearings.bearings.size(); ++i) {
    for (std::size_t j = 0; j < map_angles.size(); ++j) {
      const double d = angular_diff(map_angles[j].alpha, bearings.bearings[i].alpha);
      costs(i, j) = std::abs(d) > gate ? CostMatrix::kForbidden : d * d;
    }
  }
  return to_match_set(hungarian_solve(costs), costs, ids);
}

}  // namespace poleloc
