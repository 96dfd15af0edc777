#include "poleloc/geometry.hpp"

#include <cmath>

#include "poleloc/error.hpp"

namespace poleloc {

double wrap_angle(double a) {
  if (!std::isfinite(a)) {
    throw DomainError("wrap_angle: non-finite angle");
  }
  if (a >= -kPi && a < kPi) {
    return a;
  }
  double r = std::fmod(a + kPi, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  r -= kPi;
  // fmod is exact but the shifts above round; clamp the edges.
  if (r >= kPi) {
    r -= kTwoPi;
  }
  if (r < -kPi) {
    r = -kPi;
  }
  return r;
}

double angular_diff(double m, double y) {
  if (!std::isfinite(m) || !std::isfinite(y)) {
    throw DomainError("angular_diff: non-finite angle");
  }
  return wrap_angle(m - y);
}

Pose2D::Pose2D(double x_, double y_, double theta_)
    : x(x_), y(y_), theta(wrap_angle(theta_)) {}

Extrinsics::Extrinsics(double tx, double ty, double yaw)
    : translation(tx, ty), rotation(wrap_angle(yaw)) {}

Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

Vec2 transform_to_frame(const Vec2& p, const Pose2D& pose) {
  return rotation(pose.theta).transpose() * (p - pose.position());
}

Vec2 transform_from_frame(const Vec2& q, const Pose2D& pose) {
  return rotation(pose.theta) * q + pose.position();
}

Pose2D compose(const Pose2D& vehicle, const Extrinsics& ext) {
  const Vec2 p = transform_from_frame(ext.translation, vehicle);
  return Pose2D(p.x(), p.y(), vehicle.theta + ext.rotation);
}

}  // namespace poleloc
