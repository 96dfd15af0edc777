#include "poleloc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>
#include <spdlog/spdlog.h>

#include "poleloc/error.hpp"

namespace poleloc {

ErrorSeries compute_errors(const std::vector<EstimateSample>& estimates,
                           const std::vector<TruthSample>& truth, double tolerance) {
  ErrorSeries out;
  for (const auto& e : estimates) {
    auto it = std::lower_bound(truth.begin(), truth.end(), e.t,
                               [](const TruthSample& s, double t) { return s.t < t; });
    const TruthSample* best = nullptr;
    if (it != truth.end()) best = &*it;
    if (it != truth.begin()) {
      const TruthSample* prev = &*std::prev(it);
      if (!best || e.t - prev->t <= best->t - e.t) best = prev;
    }
    if (!best || std::abs(best->t - e.t) > tolerance) continue;

    const Vec2 err = e.pose.position() - best->pose.position();
    const double c = std::cos(best->pose.theta);
    const double s = std::sin(best->pose.theta);
    ErrorSample sample;
    sample.t = e.t;
    sample.position = err.norm();
    sample.along_track = c * err.x() + s * err.y();
    sample.cross_track = -s * err.x() + c * err.y();
    sample.heading = angular_diff(e.pose.theta, best->pose.theta);
    Eigen::LDLT<Mat2> ldlt(e.position_covariance);
    sample.nees = err.dot(ldlt.solve(err));
    out.push_back(sample);
  }
  if (out.empty() && !estimates.empty()) {
    spdlog::warn("compute_errors: no estimate aligned with ground truth");
  }
  return out;
}

double rms(const ErrorSeries& series) {
  if (series.empty()) throw DomainError("rms: empty series");
  double acc = 0.0;
  for (const auto& s : series) acc += s.position * s.position;
  return std::sqrt(acc / static_cast<double>(series.size()));
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::pair<double, double> chi_square_band(int dof, double mass) {
  boost::math::chi_squared dist(dof);
  const double tail = 0.5 * (1.0 - mass);
  return {boost::math::quantile(dist, tail), boost::math::quantile(dist, 1.0 - tail)};
}

namespace {

Quartiles quartiles(const std::vector<double>& v) {
  return {quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)};
}

ComponentStats component(const std::vector<double>& v) {
  ComponentStats c;
  std::vector<double> abs_v;
  double sum = 0.0, sq = 0.0;
  for (double x : v) {
    sum += x;
    sq += x * x;
    c.max_abs = std::max(c.max_abs, std::abs(x));
    abs_v.push_back(std::abs(x));
  }
  const double n = static_cast<double>(v.size());
  c.mean = sum / n;
  c.rms = std::sqrt(sq / n);
  c.signed_quartiles = quartiles(v);
  c.abs_quartiles = quartiles(abs_v);
  return c;
}

}  // namespace

ErrorSummary summarize(const ErrorSeries& series) {
  if (series.empty()) throw DomainError("summarize: empty series");
  ErrorSummary out;
  out.samples = series.size();
  out.rms = rms(series);
  const auto [lo, hi] = chi_square_band(2, 0.95);
  std::vector<double> ct, at;
  double sum = 0.0, heading_sq = 0.0, nees_sum = 0.0;
  std::size_t inside = 0;
  for (const auto& s : series) {
    sum += s.position;
    out.max = std::max(out.max, s.position);
    heading_sq += s.heading * s.heading;
    nees_sum += s.nees;
    if (s.nees >= lo && s.nees <= hi) ++inside;
    ct.push_back(s.cross_track);
    at.push_back(s.along_track);
  }
  const double n = static_cast<double>(series.size());
  out.mean = sum / n;
  out.heading_rms = std::sqrt(heading_sq / n);
  out.nees_mean = nees_sum / n;
  out.nees_consistency = static_cast<double>(inside) / n;
  out.cross_track = component(ct);
  out.along_track = component(at);
  return out;
}

}  // namespace poleloc
