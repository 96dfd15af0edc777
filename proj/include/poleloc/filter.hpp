#pragma once

#include <vector>

#include <Eigen/Core>

#include "poleloc/association.hpp"
#include "poleloc/camera_bearing.hpp"
#include "poleloc/geometry.hpp"
#include "poleloc/lidar_detection.hpp"
#include "poleloc/pole_map.hpp"

namespace poleloc {

inline constexpr int kStateSize = 7;

using Vec7 = Eigen::Matrix<double, kStateSize, 1>;
using Mat7 = Eigen::Matrix<double, kStateSize, kStateSize>;
using Mat27 = Eigen::Matrix<double, 2, kStateSize>;
using Row7 = Eigen::Matrix<double, 1, kStateSize>;

/// Layout of the state vector.
enum StateIndex : int {
  kX = 0,
  kY = 1,
  kTheta = 2,
  kSpeed = 3,
  kYawRate = 4,
  kBiasX = 5,
  kBiasY = 6,
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double theta_dot = 0.0;
  double bias_x = 0.0;
  double bias_y = 0.0;

  Vec7 to_vector() const;
  static VehicleState from_vector(const Vec7& s);
};

struct StateEstimate {
  Vec7 mean = Vec7::Zero();
  Mat7 covariance = Mat7::Identity();
  double timestamp = 0.0;

  VehicleState state() const { return VehicleState::from_vector(mean); }
  Pose2D pose() const { return Pose2D(mean[kX], mean[kY], mean[kTheta]); }
};

/// Continuous-time white-noise densities driving the random walks.
struct ProcessNoise {
  double speed = 0.5;      // m^2/s^3
  double yaw_rate = 0.01;  // rad^2/s^3
  double bias = 0.0;       // m^2/s
};

/// Innovation gate applied per measurement block. The threshold is the
/// chi-square quantile at `probability` for the block dimension.
struct InnovationGate {
  bool enabled = true;
  double probability = 0.99;

  double threshold(int dof) const;
};

struct UpdateReport {
  int accepted = 0;
  int rejected = 0;
  double nis_sum = 0.0;  // over accepted blocks

  void merge(const UpdateReport& other) {
    accepted += other.accepted;
    rejected += other.rejected;
    nis_sum += other.nis_sum;
  }
};

// Motion model: constant speed and yaw rate unicycle, bias constant.
Vec7 propagate(const Vec7& s, double dt);
Mat7 propagation_jacobian(const Vec7& s, double dt);
Mat7 process_covariance(const Vec7& s, double dt, const ProcessNoise& q);

// Observation models and their analytic Jacobians.
Vec2 gnss_model(const Vec7& s, const Vec2& lever);
Mat27 gnss_jacobian(const Vec7& s, const Vec2& lever);

Vec2 wheel_model(const Vec7& s, double track);
Mat27 wheel_jacobian(double track);

double gyro_model(const Vec7& s);
Row7 gyro_jacobian();

/// Landmark expressed in the LiDAR frame.
Vec2 lidar_pole_model(const Vec7& s, const Vec2& landmark, const Extrinsics& lidar);
Mat27 lidar_pole_jacobian(const Vec7& s, const Vec2& landmark, const Extrinsics& lidar);

/// Counter-clockwise bearing of a landmark in the camera frame.
double bearing_model(const Vec7& s, const Vec2& landmark, const Extrinsics& camera);
Row7 bearing_jacobian(const Vec7& s, const Vec2& landmark, const Extrinsics& camera);

/// Throws DomainError for dt <= 0.
StateEstimate predict(const StateEstimate& est, double dt, const ProcessNoise& q);

StateEstimate update_gnss(const StateEstimate& est, const Vec2& z, const Mat2& r,
                          const Vec2& lever, const InnovationGate& gate,
                          UpdateReport* report = nullptr);

StateEstimate update_wheels(const StateEstimate& est, double z_left, double z_right,
                            const Mat2& r, double track, const InnovationGate& gate,
                            UpdateReport* report = nullptr);

StateEstimate update_gyro(const StateEstimate& est, double z, double r,
                          const InnovationGate& gate, UpdateReport* report = nullptr);

/// One 2D block per matched pair; the measurement noise of a pair is the
/// covariance of its detection. Pairs failing the gate are dropped and the
/// rest are applied jointly.
StateEstimate update_lidar_poles(const StateEstimate& est, const MatchSet& matches,
                                 const PoleDetectionSet& detections, const PoleMap& map,
                                 const Extrinsics& lidar, const InnovationGate& gate,
                                 UpdateReport* report = nullptr);

/// One scalar block per matched pair, innovation = angular_diff(z, h).
StateEstimate update_camera_bearings(const StateEstimate& est, const MatchSet& matches,
                                     const BearingSet& bearings, const PoleMap& map,
                                     const Extrinsics& camera, const InnovationGate& gate,
                                     UpdateReport* report = nullptr);

}  // namespace poleloc
