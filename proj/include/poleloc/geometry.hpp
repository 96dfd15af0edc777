#pragma once

#include <numbers>

#include <Eigen/Core>

namespace poleloc {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into the half-open interval [-pi, pi).
/// Values already inside the interval are returned bit-for-bit unchanged.
double wrap_angle(double a);

/// Signed difference m - y mapped onto [-pi, pi).
double angular_diff(double m, double y);

/// Planar pose in the local ENU working frame. theta is kept wrapped.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_);

  Vec2 position() const { return {x, y}; }
};

/// Sensor mounting relative to the vehicle reference point (rear-axle center).
struct Extrinsics {
  Vec2 translation = Vec2::Zero();
  double rotation = 0.0;

  Extrinsics() = default;
  Extrinsics(double tx, double ty, double yaw);
};

Mat2 rotation(double angle);

/// Expresses a world point in the frame attached to `pose`.
Vec2 transform_to_frame(const Vec2& p, const Pose2D& pose);

/// Inverse of transform_to_frame.
Vec2 transform_from_frame(const Vec2& q, const Pose2D& pose);

/// World pose of a sensor mounted with `ext` on a vehicle at `vehicle`.
Pose2D compose(const Pose2D& vehicle, const Extrinsics& ext);

}  // namespace poleloc
