#pragma once

#include <utility>
#include <vector>

#include "poleloc/geometry.hpp"
#include "poleloc/sensor_log.hpp"

namespace poleloc {

/// Filter output at one timestamp, reduced to what the metrics need.
struct EstimateSample {
  double t = 0.0;
  Pose2D pose;
  Mat2 position_covariance = Mat2::Identity();
};

struct ErrorSample {
  double t = 0.0;
  double position = 0.0;     // m
  double cross_track = 0.0;  // m, left of travel positive
  double along_track = 0.0;  // m, ahead positive
  double heading = 0.0;      // rad, estimate minus truth
  double nees = 0.0;         // 2-dof, position block
};

using ErrorSeries = std::vector<ErrorSample>;

/// Aligns each estimate with the nearest truth sample (within `tolerance`
/// seconds) and decomposes the error in the true heading frame. Estimates
/// without a close enough truth sample are skipped.
ErrorSeries compute_errors(const std::vector<EstimateSample>& estimates,
                           const std::vector<TruthSample>& truth, double tolerance = 0.01);

/// Root mean square of the position errors. Throws DomainError when empty.
double rms(const ErrorSeries& series);

/// Linear-interpolation quantile (p in [0, 1]) of unsorted values.
double quantile(std::vector<double> values, double p);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct ComponentStats {
  double mean = 0.0;
  double rms = 0.0;
  double max_abs = 0.0;
  Quartiles signed_quartiles;
  Quartiles abs_quartiles;
};

struct ErrorSummary {
  std::size_t samples = 0;
  double rms = 0.0;
  double mean = 0.0;
  double max = 0.0;
  ComponentStats cross_track;
  ComponentStats along_track;
  double heading_rms = 0.0;
  double nees_mean = 0.0;
  double nees_consistency = 0.0;  // share inside the central 95% band
};

/// Central band holding `mass` of a chi-square distribution.
std::pair<double, double> chi_square_band(int dof, double mass);

/// Throws DomainError when empty.
ErrorSummary summarize(const ErrorSeries& series);

}  // namespace poleloc
