#include "poleloc/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "poleloc/error.hpp"

namespace poleloc {

Rng make_stream(std::uint64_t seed, std::string_view name) {
  std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  for (char c : name) material.push_back(static_cast<unsigned char>(c));
  std::seed_seq seq(material.begin(), material.end());
  return Rng(seq);
}

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(Rng& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

// Number of samples per stream over [0, duration].
std::size_t sample_count(double duration, double rate) {
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(const TrajectorySpec& spec) : spec_(spec) {
  if (spec.segments.empty()) throw ConfigError("trajectory: no segments");
  if (!(spec.speed > 0.0) || !(spec.rate > 0.0)) {
    throw ConfigError("trajectory: speed and rate must be positive");
  }
  double s = 0.0;
  double curvature = spec.initial_curvature;
  double heading = spec.start_heading;
  for (const auto& seg : spec.segments) {
    if (!(seg.length > 0.0) || seg.transition < 0.0 || seg.transition > seg.length) {
      throw ConfigError("trajectory: degenerate segment");
    }
    starts_.push_back({s, curvature, heading});
    const double ramp = seg.transition;
    heading += 0.5 * (curvature + seg.curvature) * ramp + seg.curvature * (seg.length - ramp);
    curvature = seg.curvature;
    s += seg.length;
  }
  length_ = s;

  // Composite Simpson over each meter; heading is known in closed form.
  const std::size_t n = static_cast<std::size_t>(std::ceil(length_)) + 1;
  knots_.reserve(n);
  knots_.push_back({spec.start_x, spec.start_y});
  constexpr int kSub = 16;
  for (std::size_t i = 1; i < n; ++i) {
    const double a = static_cast<double>(i - 1);
    const double h = 1.0 / kSub;
    double cx = 0.0, cy = 0.0;
    for (int k = 0; k <= kSub; ++k) {
      const double w = (k == 0 || k == kSub) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const double th = heading_at(a + k * h);
      cx += w * std::cos(th);
      cy += w * std::sin(th);
    }
    knots_.push_back({knots_.back().x + cx * h / 3.0, knots_.back().y + cy * h / 3.0});
  }
}

std::size_t Trajectory::segment_index(double s) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), s,
                             [](double v, const SegmentStart& st) { return v < st.s; });
  return it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin() - 1);
}

double Trajectory::curvature_at(double s) const {
  const std::size_t i = segment_index(s);
  const auto& seg = spec_.segments[i];
  const double d = s - starts_[i].s;
  if (d < seg.transition) {
    return starts_[i].curvature_from + (seg.curvature - starts_[i].curvature_from) * d / seg.transition;
  }
  return seg.curvature;
}

double Trajectory::heading_at(double s) const {
  const std::size_t i = segment_index(s);
  const auto& seg = spec_.segments[i];
  const double k0 = starts_[i].curvature_from;
  const double d = s - starts_[i].s;
  const double ramp = seg.transition;
  if (d < ramp) {
    return starts_[i].heading + k0 * d + (seg.curvature - k0) * d * d / (2.0 * ramp);
  }
  return starts_[i].heading + 0.5 * (k0 + seg.curvature) * ramp + seg.curvature * (d - ramp);
}

Pose2D Trajectory::pose_at_arc(double s) const {
  s = std::clamp(s, 0.0, length_);
  const std::size_t i = std::min(static_cast<std::size_t>(std::floor(s)), knots_.size() - 1);
  const double a = static_cast<double>(i);
  double x = knots_[i].x, y = knots_[i].y;
  const double span = s - a;
  if (span > 0.0) {
    constexpr int kSub = 16;
    const double h = span / kSub;
    double cx = 0.0, cy = 0.0;
    for (int k = 0; k <= kSub; ++k) {
      const double w = (k == 0 || k == kSub) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const double th = heading_at(a + k * h);
      cx += w * std::cos(th);
      cy += w * std::sin(th);
    }
    x += cx * h / 3.0;
    y += cy * h / 3.0;
  }
  return Pose2D(x, y, heading_at(s));
}

TruthSample Trajectory::at(double t) const {
  const double s = std::clamp(spec_.speed * t, 0.0, length_);
  return {t, pose_at_arc(s), spec_.speed, spec_.speed * curvature_at(s)};
}

std::vector<TruthSample> generate_trajectory(const TrajectorySpec& spec) {
  const Trajectory path(spec);
  std::vector<TruthSample> out;
  const std::size_t n = sample_count(path.duration(), spec.rate);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(path.at(static_cast<double>(i) / spec.rate));
  }
  return out;
}

// ---------------------------------------------------------------------------
// World

PoleMap generate_pole_map(const Trajectory& path, const PoleLayout& layout,
                          std::vector<WorldPole>* poles) {
  Rng rng = make_stream(layout.seed, "pole-layout");
  std::vector<Landmark> landmarks;
  std::vector<WorldPole> world;
  LandmarkId id = 1;
  for (double s0 = layout.first_at; s0 < path.length(); s0 += layout.spacing) {
    const double s = std::clamp(s0 + uniform(rng, -layout.along_jitter, layout.along_jitter), 0.0,
                                path.length());
    const double side = uniform(rng, 0.0, 1.0) < layout.left_fraction ? 1.0 : -1.0;
    const double lateral = uniform(rng, layout.lateral_min, layout.lateral_max);
    const double height = uniform(rng, layout.height_min, layout.height_max);
    const Pose2D p = path.pose_at_arc(s);
    const Vec2 normal(-std::sin(p.theta), std::cos(p.theta));
    const Vec2 pos = p.position() + side * lateral * normal;
    landmarks.push_back({id, pos});
    world.push_back({id, pos, height, layout.radius});
    ++id;
  }
  if (poles) *poles = std::move(world);
  return PoleMap(std::move(landmarks));
}

World build_world(const Trajectory& path, const Scenario& scenario, Rng& rng) {
  World world;
  world.map = generate_pole_map(path, scenario.poles, &world.poles);
  const auto& cfg = scenario.lidar.clutter;
  if (!cfg.enabled) return world;

  auto place = [&](ClutterKind kind, double half_length, double half_width, double height) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const Pose2D p = path.pose_at_arc(uniform(rng, 0.0, path.length()));
      const double side = uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0;
      const double lateral = uniform(rng, cfg.lateral_min, cfg.lateral_max);
      const Vec2 center =
          p.position() + side * lateral * Vec2(-std::sin(p.theta), std::cos(p.theta));
      bool clear = true;
      for (const auto& pole : world.poles) {
        clear = clear && (pole.position - center).norm() >= cfg.min_pole_distance + half_length;
      }
      for (const auto& other : world.clutter) {
        clear = clear && (other.center - center).norm() >= 2.0 + half_length + other.half_length;
      }
      if (clear) {
        world.clutter.push_back({kind, center, p.theta, half_length, half_width, height});
        return;
      }
    }
  };

  for (int i = 0; i < cfg.walls; ++i) {
    place(ClutterKind::kWall, uniform(rng, 2.0, 4.0), 0.15, uniform(rng, 1.5, 2.5));
  }
  for (int i = 0; i < cfg.bushes; ++i) {
    place(ClutterKind::kBush, 0.5, 0.5, uniform(rng, 0.4, 0.9));
  }
  for (int i = 0; i < cfg.posts; ++i) {
    place(ClutterKind::kPost, 0.1, 0.1, uniform(rng, 2.0, 4.0));
  }
  return world;
}

// ---------------------------------------------------------------------------
// Proprioceptive sensors

std::vector<GnssFix> synthesize_gnss(const Trajectory& path, const GnssConfig& cfg, Rng& rng) {
  std::vector<GnssFix> out;
  const Vec2 bias(cfg.bias_x, cfg.bias_y);
  const Vec2 lever(cfg.lever_x, cfg.lever_y);
  const std::size_t n = sample_count(path.duration(), cfg.rate);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.rate;
    const Pose2D p = path.at(t).pose;
    Vec2 z = p.position() + bias + rotation(p.theta) * lever;
    z.x() += gaussian(rng, cfg.sigma);
    z.y() += gaussian(rng, cfg.sigma);
    out.push_back({t, z});
  }
  return out;
}

OdometryStreams synthesize_wheels_gyro(const Trajectory& path, const OdometryConfig& cfg,
                                       Rng& wheel_rng, Rng& gyro_rng) {
  OdometryStreams out;
  const std::size_t n = sample_count(path.duration(), cfg.rate);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.rate;
    const TruthSample truth = path.at(t);
    const double half = 0.5 * cfg.track * truth.yaw_rate;
    const double left = truth.speed - half + gaussian(wheel_rng, cfg.wheel_sigma);
    const double right = truth.speed + half + gaussian(wheel_rng, cfg.wheel_sigma);
    out.wheels.push_back({t, left, right});
    out.gyro.push_back({t, truth.yaw_rate + gaussian(gyro_rng, cfg.gyro_sigma)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// LiDAR

namespace {

struct CloudBuilder {
  Pose2D sensor;
  double mount_height;
  double noise;
  Rng& rng;
  PointCloud& cloud;

  void add_world_point(double x, double y, double z) {
    const Vec2 q = transform_to_frame(Vec2(x, y), sensor);
    cloud.points.emplace_back(q.x() + gaussian(rng, noise), q.y() + gaussian(rng, noise),
                              z - mount_height + gaussian(rng, noise));
  }
};

std::size_t surface_points(double area, double range, double density) {
  const double n = density * area / std::max(range * range, 1.0);
  return static_cast<std::size_t>(std::clamp(n, 0.0, 1000.0));
}

}  // namespace

PointCloud synthesize_cloud(const Pose2D& vehicle, const World& world, const LidarConfig& cfg,
                            Rng& rng) {
  PointCloud cloud;
  const Pose2D sensor = compose(vehicle, cfg.mount);
  CloudBuilder b{sensor, cfg.mount_height, cfg.point_noise, rng, cloud};

  // Ground returns thin out with range like a spinning scanner's rings.
  for (int i = 0; i < cfg.ground_points; ++i) {
    const double r = cfg.range * uniform(rng, 0.02, 1.0);
    const double a = uniform(rng, -kPi, kPi);
    const Vec2 w = transform_from_frame(Vec2(r * std::cos(a), r * std::sin(a)), sensor);
    b.add_world_point(w.x(), w.y(), 0.0);
  }

  for (const auto& pole : world.poles) {
    const Vec2 to_sensor = sensor.position() - pole.position;
    const double range = to_sensor.norm();
    if (range > cfg.range || range < 0.5) continue;
    const double facing = std::atan2(to_sensor.y(), to_sensor.x());
    const std::size_t n =
        surface_points(2.0 * pole.radius * pole.height, range, cfg.points_per_m2);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = facing + uniform(rng, -kPi / 2.0, kPi / 2.0);
      b.add_world_point(pole.position.x() + pole.radius * std::cos(a),
                        pole.position.y() + pole.radius * std::sin(a),
                        uniform(rng, 0.0, pole.height));
    }
  }

  for (const auto& obj : world.clutter) {
    const double range = (sensor.position() - obj.center).norm();
    if (range > cfg.range) continue;
    const Mat2 rot = rotation(obj.yaw);
    // Four vertical faces: (outward normal in box frame, half extent along face).
    const std::array<std::pair<Vec2, double>, 4> faces{{{Vec2(1, 0), obj.half_width},
                                                         {Vec2(-1, 0), obj.half_width},
                                                         {Vec2(0, 1), obj.half_length},
                                                         {Vec2(0, -1), obj.half_length}}};
    for (const auto& [normal_local, half_span] : faces) {
      const double offset = normal_local.x() != 0.0 ? obj.half_length : obj.half_width;
      const Vec2 normal = rot * normal_local;
      const Vec2 face_center = obj.center + offset * normal;
      if (normal.dot(sensor.position() - face_center) <= 0.0) continue;
      const Vec2 along = rot * Vec2(-normal_local.y(), normal_local.x());
      const std::size_t n = surface_points(2.0 * half_span * obj.height,
                                           (sensor.position() - face_center).norm(),
                                           cfg.points_per_m2);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 w = face_center + uniform(rng, -half_span, half_span) * along;
        b.add_world_point(w.x(), w.y(), uniform(rng, 0.0, obj.height));
      }
    }
  }
  return cloud;
}

PoleDetectionSet synthesize_ideal_detections(const Pose2D& vehicle, const World& world,
                                             const LidarConfig& cfg, Rng& rng) {
  const Pose2D sensor = compose(vehicle, cfg.mount);
  const double sigma = std::max(cfg.ideal_sigma, 1e-3);
  PoleDetectionSet out;
  auto emit = [&](const Vec2& world_pos) {
    if ((world_pos - sensor.position()).norm() > cfg.range) return;
    Vec2 q = transform_to_frame(world_pos, sensor);
    q.x() += gaussian(rng, cfg.ideal_sigma);
    q.y() += gaussian(rng, cfg.ideal_sigma);
    out.push_back({q, sigma * sigma * Mat2::Identity()});
  };
  for (const auto& pole : world.poles) emit(pole.position);
  for (const auto& obj : world.clutter) {
    if (obj.kind == ClutterKind::kPost) emit(obj.center);
  }
  return out;
}

std::vector<LidarFrame> synthesize_lidar(const Trajectory& path, const World& world,
                                         const LidarConfig& cfg, Rng& rng) {
  std::vector<LidarFrame> out;
  const std::size_t n = sample_count(path.duration(), cfg.rate);
  for (std::size_t i = 0; i < n; ++i) {
    LidarFrame frame;
    frame.frame_id = static_cast<std::int64_t>(i);
    frame.t = static_cast<double>(i) / cfg.rate;
    const Pose2D pose = path.at(frame.t).pose;
    if (cfg.mode == LidarMode::kCloud) {
      frame.has_cloud = true;
      frame.cloud = synthesize_cloud(pose, world, cfg, rng);
    } else {
      frame.detections = synthesize_ideal_detections(pose, world, cfg, rng);
    }
    out.push_back(std::move(frame));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cameras

PixelDetectionSet synthesize_camera_frame(const Pose2D& vehicle, const World& world,
                                          const CameraConfig& cam, Rng& rng) {
  const Pose2D pose = compose(vehicle, cam.mount);
  const auto& k = cam.intrinsics;
  PixelDetectionSet out;
  for (const auto& pole : world.poles) {
    const Vec2 q = transform_to_frame(pole.position, pose);
    if (q.x() <= 0.0 || q.norm() > cam.max_range) continue;
    // Image columns grow to the right, i.e. clockwise.
    const double image_bearing = -std::atan2(q.y(), q.x());
    if (std::abs(image_bearing) >= kPi / 2.0) continue;
    const double u = bearing_to_pixel(image_bearing, k) + gaussian(rng, cam.sigma_px);
    const double v = k.cv + k.fv * cam.mount_height / q.x();
    const bool dropped = uniform(rng, 0.0, 1.0) < cam.p_false_negative;
    const double score = uniform(rng, 0.6, 1.0);
    if (dropped || !(u >= 0.0 && u < k.width) || !(v >= 0.0 && v < k.height)) continue;
    out.push_back({u, v, score});
  }

  const int spurious = std::poisson_distribution<int>(cam.false_positive_rate)(rng);
  for (int i = 0; i < spurious; ++i) {
    const double u = uniform(rng, 0.0, k.width);
    const double v = uniform(rng, k.cv, k.height);
    out.push_back({u, v, uniform(rng, 0.3, 1.0)});
  }
  if (!cam.exclusions.empty() && cam.roof_false_positive_rate > 0.0) {
    const auto& roof = cam.exclusions.front();
    const int roof_hits = std::poisson_distribution<int>(cam.roof_false_positive_rate)(rng);
    for (int i = 0; i < roof_hits; ++i) {
      const double u = std::min(uniform(rng, roof.u_min, roof.u_max), k.width - 1.0);
      const double v = std::min(uniform(rng, roof.v_min, roof.v_max), k.height - 1.0);
      out.push_back({u, v, uniform(rng, 0.5, 1.0)});
    }
  }
  return out;
}

std::vector<CameraFrame> synthesize_camera(const Trajectory& path, const World& world,
                                           const CameraConfig& cam, Rng& rng) {
  std::vector<CameraFrame> out;
  const std::size_t n = sample_count(path.duration(), cam.rate);
  for (std::size_t i = 0; i < n; ++i) {
    CameraFrame frame;
    frame.frame_id = static_cast<std::int64_t>(i);
    frame.camera_id = cam.id;
    frame.t = static_cast<double>(i) / cam.rate;
    frame.detections = synthesize_camera_frame(path.at(frame.t).pose, world, cam, rng);
    out.push_back(std::move(frame));
  }
  return out;
}

SensorLog simulate(const Scenario& scenario) {
  validate(scenario);
  const std::uint64_t seed = scenario.seed;
  const Trajectory path(scenario.trajectory);
  Rng clutter_rng = make_stream(seed, "clutter");
  const World world = build_world(path, scenario, clutter_rng);

  SensorLog log;
  log.scenario = scenario.name;
  log.seed = seed;
  log.true_bias = Vec2(scenario.gnss.bias_x, scenario.gnss.bias_y);
  log.map = world.map;
  log.truth = generate_trajectory(scenario.trajectory);

  Rng gnss_rng = make_stream(seed, "gnss");
  log.gnss = synthesize_gnss(path, scenario.gnss, gnss_rng);

  Rng wheel_rng = make_stream(seed, "wheels");
  Rng gyro_rng = make_stream(seed, "gyro");
  auto odo = synthesize_wheels_gyro(path, scenario.odometry, wheel_rng, gyro_rng);
  log.wheels = std::move(odo.wheels);
  log.gyro = std::move(odo.gyro);

  Rng lidar_rng = make_stream(seed, "lidar");
  log.lidar = synthesize_lidar(path, world, scenario.lidar, lidar_rng);

  for (const auto& cam : scenario.cameras) {
    Rng cam_rng = make_stream(seed, "camera/" + cam.name);
    auto frames = synthesize_camera(path, world, cam, cam_rng);
    log.cameras.insert(log.cameras.end(), std::make_move_iterator(frames.begin()),
                       std::make_move_iterator(frames.end()));
  }
  std::stable_sort(log.cameras.begin(), log.cameras.end(),
                   [](const CameraFrame& a, const CameraFrame& b) {
                     return a.t != b.t ? a.t < b.t : a.camera_id < b.camera_id;
                   });
  return log;
}

}  // namespace poleloc
