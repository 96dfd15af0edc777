#include "poleloc/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poleloc/error.hpp"

namespace poleloc {

using nlohmann::json;

void to_json(json& j, const Extrinsics& e) {
  j = json{{"translation", {e.translation.x(), e.translation.y()}}, {"rotation", e.rotation}};
}

void from_json(const json& j, Extrinsics& e) {
  const auto t = j.value("translation", std::vector<double>{0.0, 0.0});
  if (t.size() != 2) throw ConfigError("extrinsics translation must have two entries");
  e = Extrinsics(t[0], t[1], j.value("rotation", 0.0));
}

NLOHMANN_JSON_SERIALIZE_ENUM(LidarMode, {{LidarMode::kCloud, "cloud"}, {LidarMode::kIdeal, "ideal"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PathSegment, length, curvature, transition)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrajectorySpec, start_x, start_y, start_heading,
                                                initial_curvature, speed, rate, segments)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PoleLayout, first_at, spacing, along_jitter,
                                                lateral_min, lateral_max, left_fraction,
                                                height_min, height_max, radius, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GnssConfig, rate, sigma, bias_x, bias_y, lever_x,
                                                lever_y)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OdometryConfig, rate, wheel_sigma, gyro_sigma, track)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ClutterConfig, enabled, walls, bushes, posts,
                                                lateral_min, lateral_max, min_pole_distance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PoleGate, l_min, beta_max, h_min, t_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GroundParams, seed_height, plane_tol, iterations,
                                                num_lowest)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ClusterParams, link_radius, min_points)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DetectorParams, ground, cluster, gate, sigma)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LidarConfig, mode, rate, range, mount, mount_height,
                                                ground_points, point_noise, points_per_m2,
                                                ideal_sigma, detector, clutter)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PinholeIntrinsics, fu, fv, cu, cv, width, height)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PixelRect, u_min, v_min, u_max, v_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CameraConfig, name, id, mount, intrinsics,
                                                mount_height, rate, max_range, sigma_px,
                                                p_false_negative, false_positive_rate,
                                                roof_false_positive_rate, min_score, exclusions)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ProcessNoise, speed, yaw_rate, bias)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FilterConfig, process, init_position_sigma,
                                                init_heading_sigma, init_speed_sigma,
                                                init_yaw_rate_sigma, init_bias_sigma,
                                                gate_probability, lidar_gate, bearing_gate,
                                                bearing_max_heading_sigma,
                                                candidate_radius, output_rate,
                                                out_of_order_tolerance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Scenario, schema_version, name, seed, trajectory,
                                                poles, gnss, odometry, lidar, cameras, filter)

const CameraConfig* Scenario::camera(const std::string& camera_name) const {
  for (const auto& c : cameras) {
    if (c.name == camera_name) return &c;
  }
  return nullptr;
}

namespace {

CameraConfig side_camera(const std::string& name, int id, double side) {
  CameraConfig c;
  c.name = name;
  c.id = id;
  c.mount = Extrinsics(1.2, 0.1 * side, side * kPi / 2.0);
  // 1280 px across 129 degrees.
  c.intrinsics = PinholeIntrinsics{305.0, 305.0, 640.0, 480.0, 1280, 960};
  c.mount_height = 1.9;
  c.max_range = 25.0;
  c.sigma_px = 2.0;
  c.p_false_negative = 0.3;
  c.false_positive_rate = 0.2;
  c.roof_false_positive_rate = 0.5;
  c.exclusions = {PixelRect{0.0, 860.0, 1279.0, 959.0}};
  return c;
}

}  // namespace

Scenario compiegne_mini() {
  Scenario s;
  s.name = "compiegne-mini";
  // 250 m east, a 90-degree left bend of radius 60 m eased in and out over
  // 20 m, then north to a total of 600 m.
  const double k = 1.0 / 60.0;
  const double ease = 20.0;
  const double arc = 60.0 * kPi / 2.0;
  s.trajectory.segments = {{250.0, 0.0, 0.0}, {arc, k, ease}, {600.0 - 250.0 - arc, 0.0, ease}};

  CameraConfig front;
  front.name = "front";
  front.id = 0;
  front.mount = Extrinsics(1.5, 0.0, 0.0);
  // 52 degree vertical field of view on a 1920x1080 sensor.
  front.intrinsics = PinholeIntrinsics{1107.0, 1107.0, 960.0, 540.0, 1920, 1080};
  s.cameras = {front, side_camera("left", 1, 1.0), side_camera("right", 2, -1.0)};
  return s;
}

Scenario gentle_curve() {
  Scenario s = compiegne_mini();
  s.name = "gentle-curve";
  s.trajectory.segments = {{100.0, 0.0, 0.0}, {400.0, 1.0 / 400.0, 100.0}, {100.0, 0.0, 50.0}};
  s.lidar.mode = LidarMode::kIdeal;
  s.lidar.clutter.enabled = false;
  s.gnss.bias_x = 0.5;
  s.gnss.bias_y = -0.3;
  return s;
}

void validate(const Scenario& s) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("scenario: " + what);
  };
  require(s.schema_version == kScenarioSchemaVersion,
          "unsupported schema_version " + std::to_string(s.schema_version));
  require(!s.name.empty(), "name must not be empty");
  require(s.trajectory.speed > 0.0, "trajectory.speed must be positive");
  require(s.trajectory.rate > 0.0, "trajectory.rate must be positive");
  require(!s.trajectory.segments.empty(), "trajectory needs at least one segment");
  for (const auto& seg : s.trajectory.segments) {
    require(seg.length > 0.0, "segment length must be positive");
    require(seg.transition >= 0.0 && seg.transition <= seg.length,
            "segment transition must lie within the segment");
  }
  require(s.poles.spacing > 0.0, "poles.spacing must be positive");
  require(s.poles.lateral_min >= 0.0 && s.poles.lateral_min <= s.poles.lateral_max,
          "poles lateral range invalid");
  require(s.poles.left_fraction >= 0.0 && s.poles.left_fraction <= 1.0,
          "poles.left_fraction must be in [0, 1]");
  require(s.gnss.rate > 0.0 && s.gnss.sigma >= 0.0, "gnss rate/sigma invalid");
  require(s.odometry.rate > 0.0 && s.odometry.track > 0.0, "odometry rate/track invalid");
  require(s.odometry.wheel_sigma >= 0.0 && s.odometry.gyro_sigma >= 0.0, "odometry sigma invalid");
  require(s.lidar.rate > 0.0 && s.lidar.range > 0.0, "lidar rate/range invalid");
  require(s.lidar.detector.sigma > 0.0, "lidar.detector.sigma must be positive");
  const auto& gate = s.lidar.detector.gate;
  require(gate.l_min > 0.0 && gate.l_min < 1.0 && gate.beta_max > 0.0 && gate.h_min > 0.0 &&
              gate.t_max > 0.0,
          "pole gate thresholds invalid");
  for (const auto& c : s.cameras) {
    c.intrinsics.validate();
    require(c.rate > 0.0, "camera rate must be positive");
    require(c.sigma_px >= 0.0, "camera sigma_px must be non-negative");
    require(c.p_false_negative >= 0.0 && c.p_false_negative <= 1.0,
            "camera p_false_negative must be in [0, 1]");
    require(c.false_positive_rate >= 0.0 && c.roof_false_positive_rate >= 0.0,
            "camera false-positive rates must be non-negative");
  }
  const auto& f = s.filter;
  require(f.gate_probability > 0.0 && f.gate_probability < 1.0, "filter.gate_probability invalid");
  require(f.lidar_gate > 0.0 && f.bearing_gate > 0.0, "association gates must be positive");
  require(f.bearing_max_heading_sigma > 0.0, "bearing_max_heading_sigma must be positive");
  require(f.candidate_radius > 0.0 && f.output_rate > 0.0, "filter radius/output rate invalid");
  require(f.process.speed >= 0.0 && f.process.yaw_rate >= 0.0 && f.process.bias >= 0.0,
          "process noise must be non-negative");
}

Scenario parse_scenario_json(const std::string& text) {
  Scenario s;
  try {
    s = json::parse(text).get<Scenario>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

std::string scenario_to_json(const Scenario& s) { return json(s).dump(2) + "\n"; }

Scenario load_scenario(const std::string& path_or_name) {
  if (path_or_name == "compiegne-mini") return compiegne_mini();
  if (path_or_name == "gentle-curve") return gentle_curve();
  std::ifstream in(path_or_name);
  if (!in) {
    throw ConfigError("scenario: cannot open '" + path_or_name + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str());
}

}  // namespace poleloc
