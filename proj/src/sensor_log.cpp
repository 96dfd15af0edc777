#include "poleloc/sensor_log.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "csv_util.hpp"
#include "poleloc/error.hpp"

namespace poleloc {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <typename... Ts>
void write_row(std::ostream& out, const Ts&... values) {
  bool first = true;
  auto put = [&](const auto& v) {
    if (!first) out << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
      out << format_double(v);
    } else {
      out << v;
    }
  };
  (put(values), ...);
  out << '\n';
}

}  // namespace

void write_camera_detections_csv(const std::vector<CameraFrame>& frames, const fs::path& path) {
  auto out = open_out(path);
  out << "frame_id,camera_id,u,v,score\n";
  for (const auto& f : frames) {
    for (const auto& d : f.detections) write_row(out, f.frame_id, f.camera_id, d.u, d.v, d.score);
  }
}

void write_sensor_log(const SensorLog& log, const fs::path& dir) {
  fs::create_directories(dir);
  save_pole_map_csv(log.map, dir / "map.csv");

  {
    auto out = open_out(dir / "truth.csv");
    out << "t,x,y,theta,speed,yaw_rate\n";
    for (const auto& s : log.truth) {
      write_row(out, s.t, s.pose.x, s.pose.y, s.pose.theta, s.speed, s.yaw_rate);
    }
  }
  {
    auto out = open_out(dir / "gnss.csv");
    out << "t,east_m,north_m\n";
    for (const auto& g : log.gnss) write_row(out, g.t, g.z.x(), g.z.y());
  }
  {
    auto out = open_out(dir / "wheels.csv");
    out << "t,left_mps,right_mps\n";
    for (const auto& w : log.wheels) write_row(out, w.t, w.left, w.right);
  }
  {
    auto out = open_out(dir / "gyro.csv");
    out << "t,yaw_rate\n";
    for (const auto& g : log.gyro) write_row(out, g.t, g.rate);
  }
  {
    auto frames = open_out(dir / "lidar_frames.csv");
    auto points = open_out(dir / "lidar_points.csv");
    auto dets = open_out(dir / "lidar_detections.csv");
    frames << "frame_id,t,kind\n";
    points << "frame_id,x,y,z\n";
    dets << "frame_id,x,y,var_xx,var_xy,var_yy\n";
    for (const auto& f : log.lidar) {
      write_row(frames, f.frame_id, f.t, f.has_cloud ? "cloud" : "detections");
      for (const auto& p : f.cloud.points) write_row(points, f.frame_id, p.x(), p.y(), p.z());
      for (const auto& d : f.detections) {
        write_row(dets, f.frame_id, d.position.x(), d.position.y(), d.covariance(0, 0),
                  d.covariance(0, 1), d.covariance(1, 1));
      }
    }
  }
  {
    auto out = open_out(dir / "camera_frames.csv");
    out << "frame_id,camera_id,t\n";
    for (const auto& f : log.cameras) write_row(out, f.frame_id, f.camera_id, f.t);
  }
  write_camera_detections_csv(log.cameras, dir / "camera_detections.csv");

  nlohmann::ordered_json manifest;
  manifest["schema_version"] = kSensorLogSchemaVersion;
  manifest["scenario"] = log.scenario;
  manifest["seed"] = log.seed;
  manifest["true_bias"] = {log.true_bias.x(), log.true_bias.y()};
  manifest["streams"] = {
      {"map", {{"file", "map.csv"}, {"rows", log.map.size()}}},
      {"truth", {{"file", "truth.csv"}, {"rows", log.truth.size()}}},
      {"gnss", {{"file", "gnss.csv"}, {"rows", log.gnss.size()}}},
      {"wheels", {{"file", "wheels.csv"}, {"rows", log.wheels.size()}}},
      {"gyro", {{"file", "gyro.csv"}, {"rows", log.gyro.size()}}},
      {"lidar", {{"frames", "lidar_frames.csv"},
                 {"points", "lidar_points.csv"},
                 {"detections", "lidar_detections.csv"},
                 {"rows", log.lidar.size()}}},
      {"cameras", {{"frames", "camera_frames.csv"},
                   {"detections", "camera_detections.csv"},
                   {"rows", log.cameras.size()}}},
  };
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
}

SensorLog read_sensor_log(const fs::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw IoError("missing manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest.json: ") + e.what());
  }
  if (manifest.value("schema_version", 0) != kSensorLogSchemaVersion) {
    throw ConfigError("manifest.json: unsupported schema_version");
  }

  SensorLog log;
  log.scenario = manifest.value("scenario", std::string{});
  log.seed = manifest.value("seed", std::uint64_t{0});
  const auto bias = manifest.value("true_bias", std::vector<double>{0.0, 0.0});
  if (bias.size() == 2) log.true_bias = Vec2(bias[0], bias[1]);
  log.map = load_pole_map_csv(dir / "map.csv");

  {
    CsvReader r(dir / "truth.csv", {"t", "x", "y", "theta", "speed", "yaw_rate"});
    while (auto row = r.next()) {
      log.truth.push_back({row->as_double(0),
                           Pose2D(row->as_double(1), row->as_double(2), row->as_double(3)),
                           row->as_double(4), row->as_double(5)});
    }
  }
  {
    CsvReader r(dir / "gnss.csv", {"t", "east_m", "north_m"});
    while (auto row = r.next()) {
      log.gnss.push_back({row->as_double(0), Vec2(row->as_double(1), row->as_double(2))});
    }
  }
  {
    CsvReader r(dir / "wheels.csv", {"t", "left_mps", "right_mps"});
    while (auto row = r.next()) {
      log.wheels.push_back({row->as_double(0), row->as_double(1), row->as_double(2)});
    }
  }
  {
    CsvReader r(dir / "gyro.csv", {"t", "yaw_rate"});
    while (auto row = r.next()) log.gyro.push_back({row->as_double(0), row->as_double(1)});
  }
  {
    std::map<std::int64_t, std::size_t> index;
    CsvReader frames(dir / "lidar_frames.csv", {"frame_id", "t", "kind"});
    while (auto row = frames.next()) {
      LidarFrame f;
      f.frame_id = row->as_int(0);
      f.t = row->as_double(1);
      f.has_cloud = row->str(2) == "cloud";
      index[f.frame_id] = log.lidar.size();
      log.lidar.push_back(std::move(f));
    }
    auto frame_of = [&](std::int64_t id) -> LidarFrame& {
      auto it = index.find(id);
      if (it == index.end()) throw ConfigError("lidar data refers to unknown frame " + std::to_string(id));
      return log.lidar[it->second];
    };
    CsvReader points(dir / "lidar_points.csv", {"frame_id", "x", "y", "z"});
    while (auto row = points.next()) {
      frame_of(row->as_int(0)).cloud.points.emplace_back(row->as_double(1), row->as_double(2),
                                                         row->as_double(3));
    }
    CsvReader dets(dir / "lidar_detections.csv",
                   {"frame_id", "x", "y", "var_xx", "var_xy", "var_yy"});
    while (auto row = dets.next()) {
      PoleDetection d;
      d.position = Vec2(row->as_double(1), row->as_double(2));
      d.covariance << row->as_double(3), row->as_double(4), row->as_double(4), row->as_double(5);
      frame_of(row->as_int(0)).detections.push_back(d);
    }
  }
  {
    std::map<std::pair<std::int64_t, int>, std::size_t> index;
    CsvReader frames(dir / "camera_frames.csv", {"frame_id", "camera_id", "t"});
    while (auto row = frames.next()) {
      CameraFrame f;
      f.frame_id = row->as_int(0);
      f.camera_id = static_cast<int>(row->as_int(1));
      f.t = row->as_double(2);
      index[{f.frame_id, f.camera_id}] = log.cameras.size();
      log.cameras.push_back(std::move(f));
    }
    CsvReader dets(dir / "camera_detections.csv", {"frame_id", "camera_id", "u", "v", "score"});
    while (auto row = dets.next()) {
      auto it = index.find({row->as_int(0), static_cast<int>(row->as_int(1))});
      if (it == index.end()) throw ConfigError("camera detection refers to unknown frame");
      log.cameras[it->second].detections.push_back(
          {row->as_double(2), row->as_double(3), row->as_double(4)});
    }
  }
  return log;
}

}  // namespace poleloc
