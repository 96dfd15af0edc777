#include "poleloc/filter.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>
#include <spdlog/spdlog.h>

#include "poleloc/error.hpp"

namespace poleloc {

Vec7 VehicleState::to_vector() const {
  Vec7 s;
  s << x, y, theta, v, theta_dot, bias_x, bias_y;
  return s;
}

VehicleState VehicleState::from_vector(const Vec7& s) {
  return {s[kX], s[kY], s[kTheta], s[kSpeed], s[kYawRate], s[kBiasX], s[kBiasY]};
}

double InnovationGate::threshold(int dof) const {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, probability);
}

Vec7 propagate(const Vec7& s, double dt) {
  Vec7 out = s;
  out[kX] += s[kSpeed] * std::cos(s[kTheta]) * dt;
  out[kY] += s[kSpeed] * std::sin(s[kTheta]) * dt;
  out[kTheta] = wrap_angle(s[kTheta] + s[kYawRate] * dt);
  return out;
}

Mat7 propagation_jacobian(const Vec7& s, double dt) {
  const double c = std::cos(s[kTheta]);
  const double sn = std::sin(s[kTheta]);
  Mat7 f = Mat7::Identity();
  f(kX, kTheta) = -s[kSpeed] * sn * dt;
  f(kX, kSpeed) = c * dt;
  f(kY, kTheta) = s[kSpeed] * c * dt;
  f(kY, kSpeed) = sn * dt;
  f(kTheta, kYawRate) = dt;
  return f;
}

Mat7 process_covariance(const Vec7& s, double dt, const ProcessNoise& q) {
  // White acceleration on speed drives the along-heading position through
  // the usual integrated-random-walk block; same for yaw rate and heading.
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  const Vec2 u(std::cos(s[kTheta]), std::sin(s[kTheta]));
  Mat7 out = Mat7::Zero();
  out.block<2, 2>(kX, kX) = q.speed * dt3 / 3.0 * u * u.transpose();
  out.block<2, 1>(kX, kSpeed) = q.speed * dt2 / 2.0 * u;
  out.block<1, 2>(kSpeed, kX) = q.speed * dt2 / 2.0 * u.transpose();
  out(kSpeed, kSpeed) = q.speed * dt;
  out(kTheta, kTheta) = q.yaw_rate * dt3 / 3.0;
  out(kTheta, kYawRate) = out(kYawRate, kTheta) = q.yaw_rate * dt2 / 2.0;
  out(kYawRate, kYawRate) = q.yaw_rate * dt;
  out(kBiasX, kBiasX) = q.bias * dt;
  out(kBiasY, kBiasY) = q.bias * dt;
  return out;
}

Vec2 gnss_model(const Vec7& s, const Vec2& lever) {
  return Vec2(s[kX] + s[kBiasX], s[kY] + s[kBiasY]) + rotation(s[kTheta]) * lever;
}

Mat27 gnss_jacobian(const Vec7& s, const Vec2& lever) {
  const double c = std::cos(s[kTheta]);
  const double sn = std::sin(s[kTheta]);
  Mat27 h = Mat27::Zero();
  h(0, kX) = 1.0;
  h(1, kY) = 1.0;
  h(0, kBiasX) = 1.0;
  h(1, kBiasY) = 1.0;
  h(0, kTheta) = -sn * lever.x() - c * lever.y();
  h(1, kTheta) = c * lever.x() - sn * lever.y();
  return h;
}

Vec2 wheel_model(const Vec7& s, double track) {
  const double half = 0.5 * track * s[kYawRate];
  return Vec2(s[kSpeed] - half, s[kSpeed] + half);
}

Mat27 wheel_jacobian(double track) {
  Mat27 h = Mat27::Zero();
  h(0, kSpeed) = 1.0;
  h(1, kSpeed) = 1.0;
  h(0, kYawRate) = -0.5 * track;
  h(1, kYawRate) = 0.5 * track;
  return h;
}

double gyro_model(const Vec7& s) { return s[kYawRate]; }

Row7 gyro_jacobian() {
  Row7 h = Row7::Zero();
  h(0, kYawRate) = 1.0;
  return h;
}

namespace {

// Landmark in a sensor frame: q = R(-(theta + phi)) (m - p - R(theta) t).
struct SensorRelative {
  Vec2 q;
  Mat27 jacobian;
};

SensorRelative sensor_relative(const Vec7& s, const Vec2& landmark, const Extrinsics& ext) {
  const double theta = s[kTheta];
  const double ts = theta + ext.rotation;
  const Vec2 p(s[kX], s[kY]);
  const Mat2 rot_v = rotation(theta);
  const Mat2 rot_s_t = rotation(ts).transpose();
  const Vec2 d = landmark - p - rot_v * ext.translation;

  const double c = std::cos(theta), sn = std::sin(theta);
  const double cs = std::cos(ts), ss = std::sin(ts);
  Mat2 d_rot_s_t;  // d/dtheta of R(ts)^T
  d_rot_s_t << -ss, cs, -cs, -ss;
  Mat2 d_rot_v;  // d/dtheta of R(theta)
  d_rot_v << -sn, -c, c, -sn;

  SensorRelative out;
  out.q = rot_s_t * d;
  out.jacobian = Mat27::Zero();
  out.jacobian.block<2, 2>(0, kX) = -rot_s_t;
  out.jacobian.col(kTheta) = d_rot_s_t * d - rot_s_t * (d_rot_v * ext.translation);
  return out;
}

struct Block {
  Eigen::MatrixXd h;
  Eigen::VectorXd innovation;
  Eigen::MatrixXd r;
};

void check_finite(const StateEstimate& est, const char* what) {
  if (!est.mean.allFinite() || !est.covariance.allFinite()) {
    throw NumericalError(std::string(what) + ": estimate is no longer finite", est.timestamp);
  }
}

StateEstimate apply_blocks(const StateEstimate& est, const std::vector<Block>& blocks,
                           const InnovationGate& gate, UpdateReport* report, const char* what) {
  UpdateReport local;
  std::vector<const Block*> kept;
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    const Eigen::MatrixXd s = b.h * est.covariance * b.h.transpose() + b.r;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError(std::string(what) + ": singular innovation covariance", est.timestamp);
    }
    const double nis = b.innovation.dot(ldlt.solve(b.innovation));
    const int dof = static_cast<int>(b.innovation.size());
    if (gate.enabled && !(nis <= gate.threshold(dof))) {
      ++local.rejected;
      spdlog::debug("{} rejected at t={:.3f}: NIS {:.2f}", what, est.timestamp, nis);
      continue;
    }
    ++local.accepted;
    local.nis_sum += nis;
    kept.push_back(&b);
    rows += b.innovation.size();
  }
  if (report) report->merge(local);
  if (kept.empty()) return est;

  Eigen::MatrixXd h(rows, kStateSize);
  Eigen::VectorXd nu(rows);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(rows, rows);
  Eigen::Index at = 0;
  for (const Block* b : kept) {
    const Eigen::Index d = b->innovation.size();
    h.middleRows(at, d) = b->h;
    nu.segment(at, d) = b->innovation;
    r.block(at, at, d, d) = b->r;
    at += d;
  }

  const Eigen::MatrixXd ph = est.covariance * h.transpose();
  const Eigen::MatrixXd s = h * ph + r;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  const Eigen::MatrixXd k = ldlt.solve(ph.transpose()).transpose();

  StateEstimate out = est;
  out.mean += k * nu;
  out.mean[kTheta] = wrap_angle(out.mean[kTheta]);
  const Mat7 ikh = Mat7::Identity() - k * h;
  Mat7 p = ikh * est.covariance * ikh.transpose() + k * r * k.transpose();
  out.covariance = 0.5 * (p + p.transpose());
  check_finite(out, what);
  return out;
}

}  // namespace

Vec2 lidar_pole_model(const Vec7& s, const Vec2& landmark, const Extrinsics& lidar) {
  return sensor_relative(s, landmark, lidar).q;
}

Mat27 lidar_pole_jacobian(const Vec7& s, const Vec2& landmark, const Extrinsics& lidar) {
  return sensor_relative(s, landmark, lidar).jacobian;
}

double bearing_model(const Vec7& s, const Vec2& landmark, const Extrinsics& camera) {
  const Vec2 q = sensor_relative(s, landmark, camera).q;
  return wrap_angle(std::atan2(q.y(), q.x()));
}

Row7 bearing_jacobian(const Vec7& s, const Vec2& landmark, const Extrinsics& camera) {
  const SensorRelative rel = sensor_relative(s, landmark, camera);
  const double n2 = rel.q.squaredNorm();
  const Eigen::RowVector2d d_atan(-rel.q.y() / n2, rel.q.x() / n2);
  return d_atan * rel.jacobian;
}

StateEstimate predict(const StateEstimate& est, double dt, const ProcessNoise& q) {
  if (!(dt > 0.0)) {
    throw DomainError("predict: dt must be positive");
  }
  const Mat7 f = propagation_jacobian(est.mean, dt);
  StateEstimate out;
  out.mean = propagate(est.mean, dt);
  const Mat7 p = f * est.covariance * f.transpose() + process_covariance(est.mean, dt, q);
  out.covariance = 0.5 * (p + p.transpose());
  out.timestamp = est.timestamp + dt;
  check_finite(out, "predict");
  return out;
}

StateEstimate update_gnss(const StateEstimate& est, const Vec2& z, const Mat2& r,
                          const Vec2& lever, const InnovationGate& gate, UpdateReport* report) {
  Block b{gnss_jacobian(est.mean, lever), z - gnss_model(est.mean, lever), r};
  return apply_blocks(est, {b}, gate, report, "gnss");
}

StateEstimate update_wheels(const StateEstimate& est, double z_left, double z_right,
                            const Mat2& r, double track, const InnovationGate& gate,
                            UpdateReport* report) {
  if (!(track > 0.0)) {
    throw DomainError("update_wheels: track must be positive");
  }
  Block b{wheel_jacobian(track), Vec2(z_left, z_right) - wheel_model(est.mean, track), r};
  return apply_blocks(est, {b}, gate, report, "wheels");
}

StateEstimate update_gyro(const StateEstimate& est, double z, double r,
                          const InnovationGate& gate, UpdateReport* report) {
  if (!(r > 0.0)) {
    throw DomainError("update_gyro: variance must be positive");
  }
  Block b{gyro_jacobian(), Eigen::VectorXd::Constant(1, z - gyro_model(est.mean)),
          Eigen::MatrixXd::Constant(1, 1, r)};
  return apply_blocks(est, {b}, gate, report, "gyro");
}

StateEstimate update_lidar_poles(const StateEstimate& est, const MatchSet& matches,
                                 const PoleDetectionSet& detections, const PoleMap& map,
                                 const Extrinsics& lidar, const InnovationGate& gate,
                                 UpdateReport* report) {
  std::vector<Block> blocks;
  for (const auto& m : matches.pairs) {
    const Landmark* l = map.find(m.landmark);
    if (!l || m.measurement >= detections.size()) {
      throw DomainError("update_lidar_poles: match refers to unknown landmark or detection");
    }
    const auto& det = detections[m.measurement];
    const SensorRelative rel = sensor_relative(est.mean, l->position, lidar);
    blocks.push_back({rel.jacobian, det.position - rel.q, det.covariance});
  }
  return apply_blocks(est, blocks, gate, report, "lidar");
}

StateEstimate update_camera_bearings(const StateEstimate& est, const MatchSet& matches,
                                     const BearingSet& bearings, const PoleMap& map,
                                     const Extrinsics& camera, const InnovationGate& gate,
                                     UpdateReport* report) {
  std::vector<Block> blocks;
  for (const auto& m : matches.pairs) {
    const Landmark* l = map.find(m.landmark);
    if (!l || m.measurement >= bearings.bearings.size()) {
      throw DomainError("update_camera_bearings: match refers to unknown landmark or bearing");
    }
    const auto& b = bearings.bearings[m.measurement];
    const double predicted = bearing_model(est.mean, l->position, camera);
    blocks.push_back({bearing_jacobian(est.mean, l->position, camera),
                      Eigen::VectorXd::Constant(1, angular_diff(b.alpha, predicted)),
                      Eigen::MatrixXd::Constant(1, 1, b.variance)});
  }
  return apply_blocks(est, blocks, gate, report, "camera");
}

}  // namespace poleloc
