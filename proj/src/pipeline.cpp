#include "poleloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "poleloc/error.hpp"

namespace poleloc {

namespace {

using ordered_json = nlohmann::ordered_json;

struct CombinationInfo {
  SensorCombination value;
  std::string_view name;
  std::string_view label;
};

constexpr std::array<CombinationInfo, 6> kCombinationInfo = {{
    {SensorCombination::kGnssDr, "gnss_dr", "GNSS+DR"},
    {SensorCombination::kFront, "front", "Front"},
    {SensorCombination::kLeftRight, "left_right", "Left/Right"},
    {SensorCombination::kAllCameras, "all_cameras", "All cameras"},
    {SensorCombination::kLidar, "lidar", "LiDAR"},
    {SensorCombination::kLidarCameras, "lidar_cameras", "LiDAR+cameras"},
}};

constexpr std::array<std::string_view, kSensorSlots> kSlotNames = {
    "wheels", "gyro", "gnss", "lidar", "front", "left", "right"};

bool uses_lidar(SensorCombination c) {
  return c == SensorCombination::kLidar || c == SensorCombination::kLidarCameras;
}

bool uses_camera(SensorCombination c, const std::string& name) {
  switch (c) {
    case SensorCombination::kFront: return name == "front";
    case SensorCombination::kLeftRight: return name == "left" || name == "right";
    case SensorCombination::kAllCameras:
    case SensorCombination::kLidarCameras: return true;
    default: return false;
  }
}

int camera_slot(const std::string& name) {
  if (name == "front") return kFrontCam;
  if (name == "left") return kLeftCam;
  if (name == "right") return kRightCam;
  return -1;
}

enum class EventKind { kWheels, kGyro, kGnss, kLidar, kCamera };

struct Event {
  std::int64_t tick;  // microseconds
  int order;
  std::size_t seq;    // position in the source stream
  EventKind kind;
  std::size_t index;
  double t;
};

std::int64_t to_tick(double t) { return std::llround(t * 1e6); }

Mat7 diag7(const Vec7& sigma) { return sigma.cwiseAbs2().asDiagonal(); }

class Localizer {
 public:
  Localizer(const Scenario& sc, const SensorLog& log, const RunOptions& opt)
      : sc_(sc), log_(log), opt_(opt) {
    gate_.enabled = opt.gating;
    gate_.probability = sc.filter.gate_probability;
    const double inf = std::numeric_limits<double>::infinity();
    lidar_gate_ = opt.gating ? sc.filter.lidar_gate : inf;
    bearing_gate_ = opt.gating ? sc.filter.bearing_gate : inf;
  }

  RunResult run() {
    RunResult out;
    out.scenario = log_.scenario;
    out.seed = log_.seed;
    out.options = opt_;
    out.true_bias = log_.true_bias;
    out.update_order = update_order();

    const auto events = schedule();
    const double period = 1.0 / sc_.filter.output_rate;
    std::int64_t next_output = 0;  // index of the next output instant

    for (const auto& ev : events) {
      if (initialized_) {
        while (static_cast<double>(next_output) * period < ev.t - 1e-9) {
          emit(static_cast<double>(next_output) * period, out);
          ++next_output;
        }
      }
      process(ev);
      if (!initialized_) continue;
      if (static_cast<double>(next_output) * period < est_.timestamp - 1e-9) {
        next_output = static_cast<std::int64_t>(std::ceil(est_.timestamp / period - 1e-9));
      }
    }
    if (initialized_) {
      while (static_cast<double>(next_output) * period <= est_.timestamp + 1e-9) {
        emit(static_cast<double>(next_output) * period, out);
        ++next_output;
      }
    }
    if (!initialized_) throw ConfigError("run: fewer than two GNSS fixes in the log");

    out.errors = compute_errors(out.estimates, log_.truth);
    if (out.errors.empty()) throw ConfigError("run: no estimate overlaps the ground truth");
    out.summary = summarize(out.errors);
    out.final_bias = {est_.mean[kBiasX], est_.mean[kBiasY]};
    out.final_bias_sigma = {std::sqrt(est_.covariance(kBiasX, kBiasX)),
                            std::sqrt(est_.covariance(kBiasY, kBiasY))};
    out.totals = totals_;
    out.dropped_out_of_order = dropped_;
    return out;
  }

 private:
  std::vector<std::string> update_order() const {
    std::vector<std::string> order = {"wheels", "gyro", "gnss"};
    if (uses_lidar(opt_.sensors)) order.emplace_back("lidar");
    for (const auto& cam : sc_.cameras) {
      if (uses_camera(opt_.sensors, cam.name)) order.push_back("camera/" + cam.name);
    }
    return order;
  }

  std::vector<Event> schedule() const {
    std::vector<Event> ev;
    auto add = [&](EventKind kind, int order, std::size_t i, double t) {
      ev.push_back({to_tick(t), order, ev.size(), kind, i, t});
    };
    for (std::size_t i = 0; i < log_.wheels.size(); ++i) add(EventKind::kWheels, 0, i, log_.wheels[i].t);
    for (std::size_t i = 0; i < log_.gyro.size(); ++i) add(EventKind::kGyro, 1, i, log_.gyro[i].t);
    for (std::size_t i = 0; i < log_.gnss.size(); ++i) add(EventKind::kGnss, 2, i, log_.gnss[i].t);
    if (uses_lidar(opt_.sensors)) {
      for (std::size_t i = 0; i < log_.lidar.size(); ++i) add(EventKind::kLidar, 3, i, log_.lidar[i].t);
    }
    for (std::size_t i = 0; i < log_.cameras.size(); ++i) {
      const auto& frame = log_.cameras[i];
      for (std::size_t c = 0; c < sc_.cameras.size(); ++c) {
        const auto& cam = sc_.cameras[c];
        if (cam.id == frame.camera_id && uses_camera(opt_.sensors, cam.name)) {
          add(EventKind::kCamera, 4 + static_cast<int>(c), i, frame.t);
        }
      }
    }
    std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
      if (a.tick != b.tick) return a.tick < b.tick;
      return a.order < b.order;
    });
    return ev;
  }

  void process(const Event& ev) {
    if (!initialized_) {
      if (ev.kind == EventKind::kGnss) initialize_from(log_.gnss[ev.index]);
      return;
    }
    if (ev.t < est_.timestamp - sc_.filter.out_of_order_tolerance) {
      ++dropped_;
      spdlog::debug("dropping out-of-order measurement at t={}", ev.t);
      return;
    }
    if (ev.t > est_.timestamp) est_ = predict(est_, ev.t - est_.timestamp, sc_.filter.process);

    switch (ev.kind) {
      case EventKind::kWheels: {
        const auto& w = log_.wheels[ev.index];
        const double r = sc_.odometry.wheel_sigma * sc_.odometry.wheel_sigma;
        est_ = update_wheels(est_, w.left, w.right, Mat2::Identity() * r, sc_.odometry.track,
                             gate_, &pending_[kWheels]);
        break;
      }
      case EventKind::kGyro: {
        const auto& g = log_.gyro[ev.index];
        est_ = update_gyro(est_, g.rate, sc_.odometry.gyro_sigma * sc_.odometry.gyro_sigma, gate_,
                           &pending_[kGyro]);
        break;
      }
      case EventKind::kGnss: apply_gnss(log_.gnss[ev.index]); break;
      case EventKind::kLidar: apply_lidar(log_.lidar[ev.index]); break;
      case EventKind::kCamera: apply_camera(log_.cameras[ev.index]); break;
    }
  }

  Vec2 lever() const { return {sc_.gnss.lever_x, sc_.gnss.lever_y}; }

  void apply_gnss(const GnssFix& fix) {
    const double r = sc_.gnss.sigma * sc_.gnss.sigma;
    est_ = update_gnss(est_, fix.z, Mat2::Identity() * r, lever(), gate_, &pending_[kGnss]);
  }

  // The first fix only anchors the heading; the filter starts at the second.
  void initialize_from(const GnssFix& fix) {
    if (!first_fix_) {
      first_fix_ = fix;
      return;
    }
    const double dt = fix.t - first_fix_->t;
    const Vec2 d = fix.z - first_fix_->z;
    if (dt <= 0.0) return;
    if (d.norm() < 1.0) {
      first_fix_ = fix;  // standing still: wait for a usable baseline
      return;
    }
    const double theta = std::atan2(d.y(), d.x());
    const Vec2 p = fix.z - rotation(theta) * lever();
    Vec7 mean;
    mean << p.x(), p.y(), theta, 0.0, 0.0, 0.0, 0.0;
    Vec7 sigma;
    const auto& f = sc_.filter;
    sigma << f.init_position_sigma, f.init_position_sigma, f.init_heading_sigma,
        f.init_speed_sigma, f.init_yaw_rate_sigma, f.init_bias_sigma, f.init_bias_sigma;
    est_.mean = mean;
    est_.covariance = diag7(sigma);
    est_.timestamp = fix.t;
    initialized_ = true;
    apply_gnss(fix);
  }

  void apply_lidar(const LidarFrame& frame) {
    const auto& cfg = sc_.lidar;
    PoleDetectionSet detections =
        frame.has_cloud ? detect_poles(frame.cloud, cfg.detector) : frame.detections;
    if (detections.empty()) return;

    const Pose2D sensor = compose(est_.pose(), cfg.mount);
    const Mat2 rot = rotation(sensor.theta);
    const Mat2 p_xy = est_.covariance.block<2, 2>(kX, kX);
    std::vector<Vec2> world;
    std::vector<Mat2> cov;
    for (const auto& d : detections) {
      world.push_back(transform_from_frame(d.position, sensor));
      cov.push_back(rot * d.covariance * rot.transpose() + p_xy);
    }
    const auto candidates =
        log_.map.query_radius(est_.pose().position(), sc_.filter.candidate_radius);
    if (candidates.empty()) return;
    const MatchSet matches = gate_and_match_lidar(world, candidates, cov, lidar_gate_);
    est_ = update_lidar_poles(est_, matches, detections, log_.map, cfg.mount, gate_,
                              &pending_[kLidarSlot]);
  }

  void apply_camera(const CameraFrame& frame) {
    const CameraConfig* cam = nullptr;
    for (const auto& c : sc_.cameras) {
      if (c.id == frame.camera_id) cam = &c;
    }
    if (!cam) return;
    // Bearings from a poorly known heading pull the estimate along a
    // direction they cannot actually observe; wait for GNSS motion first.
    if (std::sqrt(est_.covariance(kTheta, kTheta)) > sc_.filter.bearing_max_heading_sigma) return;
    const BearingSet bearings =
        convert_detections(frame.detections, cam->intrinsics, cam->min_score, cam->sigma_px,
                           cam->id, cam->exclusions);
    if (bearings.bearings.empty()) return;
    const CameraAngleMap angles = project_to_camera_angles(
        log_.map, est_.pose(), cam->mount, cam->max_range, cam->intrinsics.horizontal_fov());
    if (angles.empty()) return;
    const MatchSet matches = gate_and_match_bearings(bearings, angles, bearing_gate_);
    const int slot = camera_slot(cam->name);
    UpdateReport local;
    est_ = update_camera_bearings(est_, matches, bearings, log_.map, cam->mount, gate_, &local);
    if (slot >= 0) pending_[slot].merge(local);
  }

  void emit(double t, RunResult& out) {
    StateEstimate e = est_;
    if (t > e.timestamp) e = predict(e, t - e.timestamp, sc_.filter.process);
    e.timestamp = t;
    TraceRow row;
    row.t = t;
    row.mean = e.mean;
    row.variance = e.covariance.diagonal();
    row.cov_xy = e.covariance(kX, kY);
    row.reports = pending_;
    for (int s = 0; s < kSensorSlots; ++s) totals_[s].merge(pending_[s]);
    pending_ = {};
    out.trace.push_back(row);
    out.estimates.push_back({t, e.pose(), e.covariance.block<2, 2>(kX, kX)});
  }

  const Scenario& sc_;
  const SensorLog& log_;
  RunOptions opt_;
  InnovationGate gate_;
  double lidar_gate_ = 0.0;
  double bearing_gate_ = 0.0;

  bool initialized_ = false;
  std::optional<GnssFix> first_fix_;
  StateEstimate est_;
  std::array<UpdateReport, kSensorSlots> pending_{};
  std::array<UpdateReport, kSensorSlots> totals_{};
  int dropped_ = 0;
};

ordered_json quartiles_json(const Quartiles& q) {
  return ordered_json{{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
}

ordered_json component_json(const ComponentStats& c) {
  ordered_json j;
  j["mean"] = c.mean;
  j["rms"] = c.rms;
  j["max_abs"] = c.max_abs;
  j["quartiles"] = quartiles_json(c.signed_quartiles);
  j["abs_quartiles"] = quartiles_json(c.abs_quartiles);
  return j;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

}  // namespace

SensorCombination parse_combination(std::string_view name) {
  for (const auto& info : kCombinationInfo) {
    if (info.name == name) return info.value;
  }
  throw ConfigError("unknown sensor combination '" + std::string(name) +
                    "' (expected gnss_dr, front, left_right, all_cameras, lidar or "
                    "lidar_cameras)");
}

std::string_view combination_name(SensorCombination c) {
  for (const auto& info : kCombinationInfo) {
    if (info.value == c) return info.name;
  }
  return "unknown";
}

std::string_view combination_label(SensorCombination c) {
  for (const auto& info : kCombinationInfo) {
    if (info.value == c) return info.label;
  }
  return "unknown";
}

std::string_view slot_name(int slot) {
  if (slot < 0 || slot >= kSensorSlots) return "unknown";
  return kSlotNames[static_cast<std::size_t>(slot)];
}

RunResult run_pipeline(const Scenario& scenario, const SensorLog& log, const RunOptions& options) {
  validate(scenario);
  return Localizer(scenario, log, options).run();
}

std::string summary_json(const RunResult& r) {
  ordered_json j;
  j["schema_version"] = 1;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["sensors"] = std::string(combination_name(r.options.sensors));
  j["label"] = std::string(combination_label(r.options.sensors));
  j["gating"] = r.options.gating;
  j["update_order"] = r.update_order;
  j["samples"] = r.summary.samples;
  j["rms_m"] = r.summary.rms;
  j["mean_m"] = r.summary.mean;
  j["max_m"] = r.summary.max;
  j["cross_track"] = component_json(r.summary.cross_track);
  j["along_track"] = component_json(r.summary.along_track);
  j["heading_rms_rad"] = r.summary.heading_rms;
  j["nees_mean"] = r.summary.nees_mean;
  j["nees_consistency"] = r.summary.nees_consistency;
  j["bias"] = ordered_json{{"true", {r.true_bias.x(), r.true_bias.y()}},
                           {"final", {r.final_bias.x(), r.final_bias.y()}},
                           {"final_sigma", {r.final_bias_sigma.x(), r.final_bias_sigma.y()}}};
  ordered_json sensors = ordered_json::object();
  for (int s = 0; s < kSensorSlots; ++s) {
    const auto& t = r.totals[static_cast<std::size_t>(s)];
    if (t.accepted == 0 && t.rejected == 0) continue;
    sensors[std::string(slot_name(s))] =
        ordered_json{{"accepted", t.accepted}, {"rejected", t.rejected}, {"nis_sum", t.nis_sum}};
  }
  j["updates"] = sensors;
  j["dropped_out_of_order"] = r.dropped_out_of_order;
  // Table row/column so compare can rebuild the grid without guessing.
  j["table"] = ordered_json{{"row", r.scenario + " seed " + std::to_string(r.seed)},
                            {"column", std::string(combination_label(r.options.sensors))}};
  return j.dump(2) + "\n";
}

void write_run_artifacts(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  {
    auto f = open_out(dir / "trace.csv");
    f << "t,x,y,theta,speed,yaw_rate,bias_x,bias_y,var_x,var_y,var_theta,var_speed,"
         "var_yaw_rate,var_bias_x,var_bias_y,cov_xy";
    for (int s = 0; s < kSensorSlots; ++s) {
      const auto n = slot_name(s);
      f << ',' << n << "_accepted," << n << "_rejected," << n << "_nis";
    }
    f << '\n';
    for (const auto& row : r.trace) {
      f << format_double(row.t);
      for (int i = 0; i < kStateSize; ++i) f << ',' << format_double(row.mean[i]);
      for (int i = 0; i < kStateSize; ++i) f << ',' << format_double(row.variance[i]);
      f << ',' << format_double(row.cov_xy);
      for (const auto& rep : row.reports) {
        f << ',' << rep.accepted << ',' << rep.rejected << ',' << format_double(rep.nis_sum);
      }
      f << '\n';
    }
  }
  {
    auto f = open_out(dir / "errors.csv");
    f << "t,position_m,cross_track_m,along_track_m,heading_rad,nees\n";
    for (const auto& e : r.errors) {
      f << format_double(e.t) << ',' << format_double(e.position) << ','
        << format_double(e.cross_track) << ',' << format_double(e.along_track) << ','
        << format_double(e.heading) << ',' << format_double(e.nees) << '\n';
    }
  }
  open_out(dir / "summary.json") << summary_json(r);
}

ComparisonTable compare_runs(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.size() < 2) throw ConfigError("compare: need at least two run directories");
  ComparisonTable table;
  std::map<std::string, std::map<SensorCombination, double>> cells;
  std::vector<std::string> row_order;

  for (const auto& dir : run_dirs) {
    const auto path = dir / "summary.json";
    std::ifstream f(path);
    if (!f) throw ConfigError("compare: missing " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
      const std::string scenario = j.at("scenario").get<std::string>();
      if (table.scenario.empty()) {
        table.scenario = scenario;
      } else if (scenario != table.scenario) {
        throw ConfigError("compare: scenario mismatch ('" + table.scenario + "' vs '" +
                          scenario + "')");
      }
      const auto combo = parse_combination(j.at("sensors").get<std::string>());
      const std::string row = j.at("table").at("row").get<std::string>();
      if (!cells.count(row)) row_order.push_back(row);
      if (!cells[row].emplace(combo, j.at("rms_m").get<double>()).second) {
        throw ConfigError("compare: duplicate run for " + row + " / " +
                          std::string(combination_label(combo)));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("compare: " + path.string() + ": " + e.what());
    }
  }

  for (auto c : kAllCombinations) {
    for (const auto& [row, cols] : cells) {
      if (cols.count(c)) {
        table.columns.push_back(c);
        break;
      }
    }
  }
  for (const auto& label : row_order) {
    ComparisonRow row;
    row.label = label;
    const auto& cols = cells.at(label);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      auto it = cols.find(table.columns[i]);
      if (it == cols.end()) {
        row.rms.emplace_back();
        continue;
      }
      row.rms.emplace_back(it->second);
      if (it->second < best) {
        best = it->second;
        row.best = i;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_comparison(const ComparisonTable& t) {
  std::ostringstream os;
  os << "RMS position error [m], scenario " << t.scenario << " (* = best in row)\n";
  std::size_t label_w = 8;
  for (const auto& r : t.rows) label_w = std::max(label_w, r.label.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::string head = "run";
  head.resize(label_w, ' ');
  os << head;
  for (auto c : t.columns) os << " | " << pad(std::string(combination_label(c)), 14);
  os << '\n';
  for (const auto& r : t.rows) {
    std::string label = r.label;
    label.resize(label_w, ' ');
    os << label;
    for (std::size_t i = 0; i < r.rms.size(); ++i) {
      std::string cell = "-";
      if (r.rms[i]) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", *r.rms[i]);
        cell = buf;
        if (r.best && *r.best == i) cell += '*';
      }
      os << " | " << pad(cell, 14);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace poleloc
