#include "asvnav/cli.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "asvnav/errors.hpp"

namespace asvnav::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

[[noreturn]] void bad_config(const std::string& where, const std::string& why) {
  throw ConfigError("config: " + where + ": " + why);
}

std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad_config(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) bad_config(join_path(path, item.key()), "unknown key");
  }
}

void read_double(const json& j, const std::string& path, const char* key,
                 double& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number()) bad_config(join_path(path, key), "expected a number");
  out = v.get<double>();
}

void read_bool(const json& j, const std::string& path, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_boolean()) bad_config(join_path(path, key), "expected a boolean");
  out = v.get<bool>();
}

void read_int(const json& j, const std::string& path, const char* key, int& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad_config(join_path(path, key), "expected an integer");
  out = v.get<int>();
}

void read_u64(const json& j, const std::string& path, const char* key,
              std::uint64_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    bad_config(join_path(path, key), "expected a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

void read_string(const json& j, const std::string& path, const char* key,
                 std::string& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_string()) bad_config(join_path(path, key), "expected a string");
  out = v.get<std::string>();
}

void load_trajectory(const json& j, const std::string& path, sim::TrajectoryParams& p) {
  check_keys(j, path,
             {"speed_mps", "heading_rad", "roll_amp_rad", "roll_period_s",
              "pitch_amp_rad", "pitch_period_s", "heave_amp_m", "heave_period_s"});
  read_double(j, path, "speed_mps", p.speed_mps);
  read_double(j, path, "heading_rad", p.heading_rad);
  read_double(j, path, "roll_amp_rad", p.roll_amp_rad);
  read_double(j, path, "roll_period_s", p.roll_period_s);
  read_double(j, path, "pitch_amp_rad", p.pitch_amp_rad);
  read_double(j, path, "pitch_period_s", p.pitch_period_s);
  read_double(j, path, "heave_amp_m", p.heave_amp_m);
  read_double(j, path, "heave_period_s", p.heave_period_s);
}

void load_sensors(const json& j, const std::string& path, sim::SensorSchedule& s) {
  check_keys(j, path,
             {"noise_scale", "imu_rate_hz", "gyro_std_rad", "accel_std_mps2",
              "gps_enabled", "gps_rate_hz", "gps_sigma_xy_m", "gps_sigma_z_m",
              "heading_enabled", "heading_rate_hz", "heading_std_rad",
              "rollpitch_enabled", "rollpitch_rate_hz", "rollpitch_std_rad"});
  read_double(j, path, "noise_scale", s.noise_scale);
  read_double(j, path, "imu_rate_hz", s.imu_rate_hz);
  read_double(j, path, "gyro_std_rad", s.gyro_std);
  read_double(j, path, "accel_std_mps2", s.accel_std);
  read_bool(j, path, "gps_enabled", s.gps_enabled);
  read_double(j, path, "gps_rate_hz", s.gps_rate_hz);
  read_double(j, path, "gps_sigma_xy_m", s.gps_sigma_xy);
  read_double(j, path, "gps_sigma_z_m", s.gps_sigma_z);
  read_bool(j, path, "heading_enabled", s.heading_enabled);
  read_double(j, path, "heading_rate_hz", s.heading_rate_hz);
  read_double(j, path, "heading_std_rad", s.heading_std);
  read_bool(j, path, "rollpitch_enabled", s.rollpitch_enabled);
  read_double(j, path, "rollpitch_rate_hz", s.rollpitch_rate_hz);
  read_double(j, path, "rollpitch_std_rad", s.rollpitch_std);
}

void load_perturbation(const json& j, const std::string& path,
                       sim::InitialPerturbation& p) {
  check_keys(j, path, {"orientation_std_rad", "velocity_std_mps",
                       "position_xy_std_m", "position_z_std_m"});
  read_double(j, path, "orientation_std_rad", p.orientation_std_rad);
  read_double(j, path, "velocity_std_mps", p.velocity_std);
  read_double(j, path, "position_xy_std_m", p.position_xy_std);
  read_double(j, path, "position_z_std_m", p.position_z_std);
}

void load_camera(const json& j, const std::string& path, horizon::CameraIntrinsics& c) {
  check_keys(j, path, {"f_y_px", "c_y_px", "image_width_px", "image_height_px"});
  read_double(j, path, "f_y_px", c.f_y);
  read_double(j, path, "c_y_px", c.c_y);
  read_int(j, path, "image_width_px", c.image_width);
  read_int(j, path, "image_height_px", c.image_height);
}

void load_horizon(const json& j, const std::string& path, horizon::HorizonGeometry& g) {
  check_keys(j, path, {"camera_height_m", "earth_radius_m", "mount_pitch_rad"});
  read_double(j, path, "camera_height_m", g.camera_height_v);
  read_double(j, path, "earth_radius_m", g.earth_radius_re);
  read_double(j, path, "mount_pitch_rad", g.mount_pitch);
}

void require_config(bool ok, const std::string& where, const std::string& why) {
  if (!ok) bad_config(where, why);
}

void validate_config(const ExperimentConfig& c) {
  require_config(c.mc.n_runs >= 1, "n_runs", "must be >= 1");
  require_config(c.mc.duration_s > 0.0, "duration_s", "must be positive");
  require_config(c.mc.n_threads >= 1, "n_threads", "must be >= 1");
  require_config(c.mc.divergence_xy_m > 0.0, "divergence_xy_m", "must be positive");
  require_config(c.mc.gate_rad > 0.0, "gate_rad", "must be positive");
  const auto& s = c.mc.schedule;
  require_config(s.imu_rate_hz >= 10.0, "sensors.imu_rate_hz",
                 "must be >= 10 (propagation steps are capped at 0.1 s)");
  require_config(s.noise_scale >= 0.0, "sensors.noise_scale", "must be >= 0");
  require_config(s.gyro_std >= 0.0, "sensors.gyro_std_rad", "must be >= 0");
  require_config(s.accel_std >= 0.0, "sensors.accel_std_mps2", "must be >= 0");
  require_config(s.gps_rate_hz > 0.0, "sensors.gps_rate_hz", "must be positive");
  require_config(s.gps_sigma_xy > 0.0, "sensors.gps_sigma_xy_m", "must be positive");
  require_config(s.gps_sigma_z > 0.0, "sensors.gps_sigma_z_m", "must be positive");
  require_config(s.heading_rate_hz > 0.0, "sensors.heading_rate_hz", "must be positive");
  require_config(s.heading_std > 0.0, "sensors.heading_std_rad", "must be positive");
  require_config(s.rollpitch_rate_hz > 0.0, "sensors.rollpitch_rate_hz",
                 "must be positive");
  require_config(s.rollpitch_std > 0.0, "sensors.rollpitch_std_rad", "must be positive");
  const auto& i = c.mc.init;
  require_config(i.orientation_std_rad >= 0.0, "initial_perturbation.orientation_std_rad",
                 "must be >= 0");
  require_config(i.velocity_std >= 0.0, "initial_perturbation.velocity_std_mps",
                 "must be >= 0");
  require_config(i.position_xy_std >= 0.0, "initial_perturbation.position_xy_std_m",
                 "must be >= 0");
  require_config(i.position_z_std >= 0.0, "initial_perturbation.position_z_std_m",
                 "must be >= 0");
  require_config(c.cam.f_y > 0.0, "camera.f_y_px", "must be positive");
  require_config(c.cam.image_width > 0, "camera.image_width_px", "must be positive");
  require_config(c.cam.image_height > 0, "camera.image_height_px", "must be positive");
  require_config(c.geom.camera_height_v > 0.0, "horizon.camera_height_m",
                 "must be positive");
  require_config(c.geom.camera_height_v < c.geom.earth_radius_re,
                 "horizon.camera_height_m", "must be below the Earth radius");
  require_config(!c.filters.empty(), "filters", "must name at least one filter");
  require_config(!c.modes.empty(), "modes", "must name at least one mode");
  require_config(!c.out_dir.empty(), "out_dir", "must not be empty");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Single writer for all outputs; every file lands under out_dir.
class OutputWriter {
 public:
  explicit OutputWriter(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
    if (!out.flush()) throw ConfigError("failed writing " + p.string());
  }

 private:
  fs::path dir_;
};

std::string metrics_csv(const std::vector<sim::RunMetrics>& metrics) {
  std::string out =
      "run,mean_xy_m,mean_z_m,mean_roll_rad,mean_pitch_rad,mean_yaw_rad,"
      "mean_vel_mps,diverged\n";
  for (const auto& m : metrics) {
    out += std::to_string(m.run_index) + ',' + fmt(m.mean_xy) + ',' + fmt(m.mean_z) +
           ',' + fmt(m.mean_roll) + ',' + fmt(m.mean_pitch) + ',' + fmt(m.mean_yaw) +
           ',' + fmt(m.mean_vel) + ',' + (m.diverged ? "1" : "0") + '\n';
  }
  return out;
}

void append_stats(std::string& row, const sim::MetricSummary& s) {
  row += ',' + fmt(s.mean) + ',' + fmt(s.median) + ',' + fmt(s.q1) + ',' + fmt(s.q3);
}

std::string summary_header() {
  std::string h = "filter,mode,n_runs,diverged";
  for (const char* metric : {"xy_m", "z_m", "roll_rad", "pitch_rad", "yaw_rad",
                             "vel_mps"}) {
    for (const char* stat : {"mean", "median", "q1", "q3"}) {
      h += ',';
      h += stat;
      h += '_';
      h += metric;
    }
  }
  h += ",mean_nees\n";
  return h;
}

std::string summary_row(sim::FilterKind filter, sim::MeasurementMode mode,
                        const sim::Summary& s) {
  std::string row = std::string(to_string(filter)) + ',' + to_string(mode) + ',' +
                    std::to_string(s.n_runs) + ',' + std::to_string(s.diverged_count);
  append_stats(row, s.xy);
  append_stats(row, s.z);
  append_stats(row, s.roll);
  append_stats(row, s.pitch);
  append_stats(row, s.yaw);
  append_stats(row, s.vel);
  row += ',' + fmt(s.mean_nees) + '\n';
  return row;
}

std::string file_tag(sim::FilterKind filter, sim::MeasurementMode mode) {
  return std::string(to_string(filter)) + '_' + to_string(mode);
}

double parse_log_double(const std::string& field, std::size_t row, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (field.empty() || pos != field.size()) {
    throw ConfigError("log row " + std::to_string(row) + ": malformed " + what +
                      " '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

constexpr const char* kLogHeader = "t,sensor,v0,v1,v2,v3,v4,v5";

std::string log_row(double t, const char* sensor,
                    std::initializer_list<double> values) {
  std::string row = fmt(t) + (',' + std::string(sensor));
  std::size_t n = 0;
  for (const double v : values) {
    row += ',' + fmt(v);
    ++n;
  }
  for (; n < 6; ++n) row += ',';
  row += '\n';
  return row;
}

}  // namespace

const char* to_string(sim::FilterKind kind) {
  return kind == sim::FilterKind::inekf ? "inekf" : "mekf";
}

const char* to_string(sim::MeasurementMode mode) {
  switch (mode) {
    case sim::MeasurementMode::partial_30hz:
      return "partial-30hz";
    case sim::MeasurementMode::partial_6hz:
      return "partial-6hz";
    case sim::MeasurementMode::reconstructed_full_1hz:
      return "reconstructed-full-1hz";
    case sim::MeasurementMode::no_rollpitch:
      return "no-rollpitch";
  }
  return "unknown";
}

sim::FilterKind filter_from_string(const std::string& name) {
  if (name == "inekf") return sim::FilterKind::inekf;
  if (name == "mekf") return sim::FilterKind::mekf;
  throw ConfigError("config: filters: unknown filter '" + name + "'");
}

sim::MeasurementMode mode_from_string(const std::string& name) {
  if (name == "partial-30hz") return sim::MeasurementMode::partial_30hz;
  if (name == "partial-6hz") return sim::MeasurementMode::partial_6hz;
  if (name == "reconstructed-full-1hz") {
    return sim::MeasurementMode::reconstructed_full_1hz;
  }
  if (name == "no-rollpitch") return sim::MeasurementMode::no_rollpitch;
  throw ConfigError("config: modes: unknown mode '" + name + "'");
}

ExperimentConfig default_montecarlo_config() {
  ExperimentConfig c;
  c.mc.n_runs = 50;
  c.filters = {sim::FilterKind::inekf};
  c.modes = {sim::MeasurementMode::partial_30hz, sim::MeasurementMode::partial_6hz,
             sim::MeasurementMode::reconstructed_full_1hz};
  return c;
}

ExperimentConfig default_convergence_config() {
  ExperimentConfig c;
  c.mc.n_runs = 100;
  // Large innovations are the object of study here, so the outlier gate sits
  // at the log-branch limit instead of the nominal 3 rad.
  c.mc.gate_rad = M_PI - 1e-3;
  c.filters = {sim::FilterKind::inekf, sim::FilterKind::mekf};
  c.modes = {sim::MeasurementMode::partial_6hz, sim::MeasurementMode::no_rollpitch};
  return c;
}

ExperimentConfig default_replay_config() {
  ExperimentConfig c;
  c.mc.n_runs = 1;
  c.filters = {sim::FilterKind::inekf};
  c.modes = {sim::MeasurementMode::partial_30hz};
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  if (path.empty()) return base;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t line =
        1 + static_cast<std::size_t>(
                std::count(text.begin(), text.begin() + std::min(e.byte, text.size()),
                           '\n'));
    throw ConfigError("config: " + path + ": parse error at line " +
                      std::to_string(line) + ": " + e.what());
  }

  check_keys(j, "",
             {"n_runs", "seed", "duration_s", "n_threads", "divergence_xy_m",
              "gate_rad", "record_nees", "filters", "modes", "out_dir", "trajectory",
              "sensors", "initial_perturbation", "camera", "horizon"});
  read_int(j, "", "n_runs", base.mc.n_runs);
  read_u64(j, "", "seed", base.mc.seed);
  read_double(j, "", "duration_s", base.mc.duration_s);
  read_int(j, "", "n_threads", base.mc.n_threads);
  read_double(j, "", "divergence_xy_m", base.mc.divergence_xy_m);
  read_double(j, "", "gate_rad", base.mc.gate_rad);
  read_bool(j, "", "record_nees", base.mc.record_nees);
  read_string(j, "", "out_dir", base.out_dir);
  if (j.contains("filters")) {
    const auto& v = j.at("filters");
    if (!v.is_array()) bad_config("filters", "expected an array of strings");
    base.filters.clear();
    for (const auto& item : v) {
      if (!item.is_string()) bad_config("filters", "expected an array of strings");
      base.filters.push_back(filter_from_string(item.get<std::string>()));
    }
  }
  if (j.contains("modes")) {
    const auto& v = j.at("modes");
    if (!v.is_array()) bad_config("modes", "expected an array of strings");
    base.modes.clear();
    for (const auto& item : v) {
      if (!item.is_string()) bad_config("modes", "expected an array of strings");
      base.modes.push_back(mode_from_string(item.get<std::string>()));
    }
  }
  if (j.contains("trajectory")) {
    load_trajectory(j.at("trajectory"), "trajectory", base.mc.trajectory);
  }
  if (j.contains("sensors")) load_sensors(j.at("sensors"), "sensors", base.mc.schedule);
  if (j.contains("initial_perturbation")) {
    load_perturbation(j.at("initial_perturbation"), "initial_perturbation",
                      base.mc.init);
  }
  if (j.contains("camera")) load_camera(j.at("camera"), "camera", base.cam);
  if (j.contains("horizon")) load_horizon(j.at("horizon"), "horizon", base.geom);
  return base;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["n_runs"] = c.mc.n_runs;
  j["seed"] = c.mc.seed;
  j["duration_s"] = c.mc.duration_s;
  j["n_threads"] = c.mc.n_threads;
  j["divergence_xy_m"] = c.mc.divergence_xy_m;
  j["gate_rad"] = c.mc.gate_rad;
  j["record_nees"] = c.mc.record_nees;
  j["filters"] = json::array();
  for (const auto f : c.filters) j["filters"].push_back(to_string(f));
  j["modes"] = json::array();
  for (const auto m : c.modes) j["modes"].push_back(to_string(m));
  j["out_dir"] = c.out_dir;
  j["trajectory"] = {{"speed_mps", c.mc.trajectory.speed_mps},
                     {"heading_rad", c.mc.trajectory.heading_rad},
                     {"roll_amp_rad", c.mc.trajectory.roll_amp_rad},
                     {"roll_period_s", c.mc.trajectory.roll_period_s},
                     {"pitch_amp_rad", c.mc.trajectory.pitch_amp_rad},
                     {"pitch_period_s", c.mc.trajectory.pitch_period_s},
                     {"heave_amp_m", c.mc.trajectory.heave_amp_m},
                     {"heave_period_s", c.mc.trajectory.heave_period_s}};
  j["sensors"] = {{"noise_scale", c.mc.schedule.noise_scale},
                  {"imu_rate_hz", c.mc.schedule.imu_rate_hz},
                  {"gyro_std_rad", c.mc.schedule.gyro_std},
                  {"accel_std_mps2", c.mc.schedule.accel_std},
                  {"gps_enabled", c.mc.schedule.gps_enabled},
                  {"gps_rate_hz", c.mc.schedule.gps_rate_hz},
                  {"gps_sigma_xy_m", c.mc.schedule.gps_sigma_xy},
                  {"gps_sigma_z_m", c.mc.schedule.gps_sigma_z},
                  {"heading_enabled", c.mc.schedule.heading_enabled},
                  {"heading_rate_hz", c.mc.schedule.heading_rate_hz},
                  {"heading_std_rad", c.mc.schedule.heading_std},
                  {"rollpitch_enabled", c.mc.schedule.rollpitch_enabled},
                  {"rollpitch_rate_hz", c.mc.schedule.rollpitch_rate_hz},
                  {"rollpitch_std_rad", c.mc.schedule.rollpitch_std}};
  j["initial_perturbation"] = {{"orientation_std_rad", c.mc.init.orientation_std_rad},
                               {"velocity_std_mps", c.mc.init.velocity_std},
                               {"position_xy_std_m", c.mc.init.position_xy_std},
                               {"position_z_std_m", c.mc.init.position_z_std}};
  j["camera"] = {{"f_y_px", c.cam.f_y},
                 {"c_y_px", c.cam.c_y},
                 {"image_width_px", c.cam.image_width},
                 {"image_height_px", c.cam.image_height}};
  j["horizon"] = {{"camera_height_m", c.geom.camera_height_v},
                  {"earth_radius_m", c.geom.earth_radius_re},
                  {"mount_pitch_rad", c.geom.mount_pitch}};
  return j.dump(2) + "\n";
}

void write_sensor_log(const sim::SensorStream& stream, const std::string& path) {
  // Merge chronologically; at equal stamps IMU comes first so a replaying
  // filter predicts before it updates.
  struct Row {
    double t;
    int kind;
    std::string text;
  };
  std::vector<Row> rows;
  rows.reserve(stream.imu.size() + stream.gps.size() + stream.heading.size() +
               stream.rollpitch.size());
  for (const auto& s : stream.imu) {
    rows.push_back({s.t, 0,
                    log_row(s.t, "imu",
                            {s.gyro[0], s.gyro[1], s.gyro[2], s.accel[0], s.accel[1],
                             s.accel[2]})});
  }
  for (const auto& g : stream.gps) {
    rows.push_back({g.t, 1, log_row(g.t, "gps", {g.xyz[0], g.xyz[1], g.xyz[2]})});
  }
  for (const auto& h : stream.heading) {
    rows.push_back({h.t, 2, log_row(h.t, "heading", {h.psi})});
  }
  for (const auto& rp : stream.rollpitch) {
    rows.push_back({rp.t, 3, log_row(rp.t, "rollpitch", {rp.phi, rp.theta})});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.kind < b.kind;
  });

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write log " + path);
  out << kLogHeader << '\n';
  for (const auto& r : rows) out << r.text;
  if (!out.flush()) throw ConfigError("failed writing log " + path);
}

SensorLog read_sensor_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open log " + path);

  SensorLog log;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line.rfind("t,sensor", 0) != 0) {
        throw ConfigError("log row 1: expected header '" + std::string(kLogHeader) +
                          "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() < 2) {
      throw ConfigError("log row " + std::to_string(row) + ": expected t,sensor,...");
    }
    const double t = parse_log_double(fields[0], row, "timestamp");
    const std::string& sensor = fields[1];

    const auto value = [&](std::size_t i, const char* what) {
      if (2 + i >= fields.size()) {
        throw ConfigError("log row " + std::to_string(row) + ": missing " + what);
      }
      return parse_log_double(fields[2 + i], row, what);
    };
    const auto check_trailing = [&](std::size_t used) {
      for (std::size_t i = 2 + used; i < fields.size(); ++i) {
        if (!fields[i].empty()) {
          throw ConfigError("log row " + std::to_string(row) +
                            ": unexpected extra value '" + fields[i] + "'");
        }
      }
    };

    if (sensor == "imu") {
      inekf::ImuSample s;
      s.gyro = Vec3(value(0, "gyro x"), value(1, "gyro y"), value(2, "gyro z"));
      s.accel = Vec3(value(3, "accel x"), value(4, "accel y"), value(5, "accel z"));
      s.t = t;
      check_trailing(6);
      log.stream.imu.push_back(s);
    } else if (sensor == "gps") {
      measurements::GpsReading g;
      g.xyz = Vec3(value(0, "gps x"), value(1, "gps y"), value(2, "gps z"));
      g.t = t;
      check_trailing(3);
      log.stream.gps.push_back(g);
    } else if (sensor == "heading") {
      measurements::HeadingReading h;
      h.psi = value(0, "heading");
      h.t = t;
      check_trailing(1);
      log.stream.heading.push_back(h);
    } else if (sensor == "rollpitch") {
      measurements::RollPitchReading rp;
      rp.phi = value(0, "roll");
      rp.theta = value(1, "pitch");
      rp.t = t;
      check_trailing(2);
      log.stream.rollpitch.push_back(rp);
    } else if (sensor == "segment") {
      horizon::Segment seg;
      seg.p0 = Eigen::Vector2d(value(0, "segment x0"), value(1, "segment y0"));
      seg.p1 = Eigen::Vector2d(value(2, "segment x1"), value(3, "segment y1"));
      check_trailing(4);
      log.segments.emplace_back(t, seg);
    } else {
      throw ConfigError("log row " + std::to_string(row) + ": unknown sensor '" +
                        sensor + "'");
    }
  }
  if (!header_seen) throw ConfigError("log is empty: " + path);
  return log;
}

namespace {

ExperimentConfig configure(const std::string& config_path, ExperimentConfig base,
                           const CliOptions& opts) {
  ExperimentConfig config = load_config(config_path, std::move(base));
  if (opts.out_dir) config.out_dir = *opts.out_dir;
  if (opts.seed) config.mc.seed = *opts.seed;
  if (opts.runs) config.mc.n_runs = *opts.runs;
  validate_config(config);
  return config;
}

void say(const CliOptions& opts, const std::string& line) {
  if (!opts.quiet) std::printf("%s\n", line.c_str());
}

int fail(const std::exception& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  return 1;
}

}  // namespace

int cmd_montecarlo(const std::string& config_path, const CliOptions& opts) {
  try {
    const ExperimentConfig config =
        configure(config_path, default_montecarlo_config(), opts);
    const OutputWriter writer{config.out_dir};
    writer.write("effective_config.json", config_to_json(config));

    std::string summary = summary_header();
    for (const auto filter : config.filters) {
      for (const auto mode : config.modes) {
        const auto metrics = sim::run_monte_carlo(config.mc, filter, mode);
        const auto stats = sim::summarize(metrics);
        writer.write("metrics_" + file_tag(filter, mode) + ".csv",
                     metrics_csv(metrics));
        summary += summary_row(filter, mode, stats);
        say(opts, "montecarlo " + file_tag(filter, mode) + ": " +
                      std::to_string(stats.n_runs) + " runs, " +
                      std::to_string(stats.diverged_count) + " diverged, mean xy " +
                      fmt(stats.xy.mean) + " m");
      }
    }
    writer.write("summary.csv", summary);
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int cmd_convergence(const std::string& config_path, const CliOptions& opts) {
  try {
    const ExperimentConfig config =
        configure(config_path, default_convergence_config(), opts);
    const OutputWriter writer{config.out_dir};
    writer.write("effective_config.json", config_to_json(config));

    const double dt = 1.0 / config.mc.schedule.imu_rate_hz;
    std::string counts = "filter,mode,n_runs,diverged\n";
    for (const auto filter : config.filters) {
      for (const auto mode : config.modes) {
        const auto metrics = sim::run_monte_carlo(config.mc, filter, mode);

        // Plot-ready error trajectories over the first 10 s of every run.
        std::string traj =
            "run,t_s,roll_err_rad,pitch_err_rad,yaw_err_rad,xy_err_m\n";
        for (const auto& m : metrics) {
          const auto n = std::min<std::size_t>(
              m.roll_err.size(), static_cast<std::size_t>(10.0 / dt) + 1);
          for (std::size_t k = 0; k < n; ++k) {
            traj += std::to_string(m.run_index) + ',' +
                    fmt(static_cast<double>(k) * dt) + ',' + fmt(m.roll_err[k]) +
                    ',' + fmt(m.pitch_err[k]) + ',' + fmt(m.yaw_err[k]) + ',' +
                    fmt(m.xy_err[k]) + '\n';
          }
        }
        writer.write("convergence_" + file_tag(filter, mode) + ".csv", traj);

        const auto stats = sim::summarize(metrics);
        counts += std::string(to_string(filter)) + ',' + to_string(mode) + ',' +
                  std::to_string(stats.n_runs) + ',' +
                  std::to_string(stats.diverged_count) + '\n';
        say(opts, "convergence " + file_tag(filter, mode) + ": " +
                      std::to_string(stats.diverged_count) + "/" +
                      std::to_string(stats.n_runs) + " diverged");
      }
    }
    writer.write("convergence_counts.csv", counts);
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int cmd_replay(const std::string& log_path, const std::string& config_path,
               const CliOptions& opts) {
  try {
    const ExperimentConfig config =
        configure(config_path, default_replay_config(), opts);
    SensorLog log = read_sensor_log(log_path);
    if (log.stream.imu.empty()) {
      throw ConfigError("log has no imu samples: " + log_path);
    }
    auto& stream = log.stream;
    const auto& schedule = config.mc.schedule;
    for (auto& g : stream.gps) {
      g.sigma_xy = schedule.gps_sigma_xy;
      g.sigma_z = schedule.gps_sigma_z;
    }
    for (auto& h : stream.heading) h.sigma_psi = schedule.heading_std;
    for (auto& rp : stream.rollpitch) {
      rp.sigma_phi = schedule.rollpitch_std;
      rp.sigma_theta = schedule.rollpitch_std;
    }
    // Segment rows become roll/pitch readings through the horizon pipeline;
    // frames with no usable horizon are skipped, not fatal.
    std::size_t skipped_segments = 0;
    for (const auto& [t, seg] : log.segments) {
      try {
        stream.rollpitch.push_back(horizon::horizon_to_reading(
            {seg}, config.cam, config.geom, schedule.rollpitch_std, t));
      } catch (const NoHorizonError&) {
        ++skipped_segments;
      } catch (const HorizonOutOfFrameError&) {
        ++skipped_segments;
      }
    }
    std::stable_sort(stream.rollpitch.begin(), stream.rollpitch.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });

    // Mode inference: downgrade when the log carries no roll/pitch source.
    sim::MeasurementMode mode = config.modes.front();
    if (stream.rollpitch.empty() && mode != sim::MeasurementMode::no_rollpitch) {
      mode = sim::MeasurementMode::no_rollpitch;
      say(opts, "replay: no roll/pitch rows, running in no-rollpitch mode");
    }
    const sim::FilterKind filter = config.filters.front();

    // Rebase stamps so the first IMU sample lands one step after t = 0; the
    // grid step is inferred from the first gap.
    const double dt = stream.imu.size() > 1
                          ? stream.imu[1].t - stream.imu[0].t
                          : 1.0 / schedule.imu_rate_hz;
    if (!(dt > 0.0) || dt > 0.1) {
      throw ConfigError("log imu stamps must increase in steps of at most 0.1 s");
    }
    const double offset = stream.imu.front().t - dt;
    for (auto& s : stream.imu) s.t -= offset;
    for (auto& g : stream.gps) g.t -= offset;
    for (auto& h : stream.heading) h.t -= offset;
    for (auto& rp : stream.rollpitch) rp.t -= offset;

    const auto n = static_cast<std::int64_t>(stream.imu.size());
    const auto events = sim::build_events(stream, mode, dt, n);

    sim::RunOptions run_opts;
    run_opts.noise = inekf::ProcessNoise::from_sensor_stds(
        schedule.gyro_std, schedule.accel_std, schedule.imu_rate_hz);
    run_opts.divergence_xy_m = config.mc.divergence_xy_m;
    run_opts.gate_rad = config.mc.gate_rad;
    run_opts.record_estimates = true;

    lie::ExtendedPose x0;
    if (!stream.gps.empty()) x0.p = stream.gps.front().xyz;
    const Mat9 sigma0 = sim::init_covariance(config.mc.init);
    const auto result =
        sim::run_filter(filter, x0, sigma0, stream.imu, events, nullptr, run_opts);

    std::string csv =
        "t_s,roll_rad,pitch_rad,yaw_rad,vx_mps,vy_mps,vz_mps,px_m,py_m,pz_m\n";
    for (std::size_t k = 0; k < result.estimates.size(); ++k) {
      const auto& est = result.estimates[k];
      const double t =
          k == 0 ? offset : stream.imu[k - 1].t + offset;  // original stamps
      const Vec3 euler = lie::euler_zyx(est.r);
      csv += fmt(t) + ',' + fmt(euler[0]) + ',' + fmt(euler[1]) + ',' +
             fmt(euler[2]) + ',' + fmt(est.v[0]) + ',' + fmt(est.v[1]) + ',' +
             fmt(est.v[2]) + ',' + fmt(est.p[0]) + ',' + fmt(est.p[1]) + ',' +
             fmt(est.p[2]) + '\n';
    }
    const OutputWriter writer{config.out_dir};
    writer.write("effective_config.json", config_to_json(config));
    writer.write("replay_states.csv", csv);
    say(opts, "replay " + std::string(to_string(filter)) + ' ' + to_string(mode) +
                  ": " + std::to_string(stream.imu.size()) + " steps, " +
                  std::to_string(result.metrics.skipped_updates) +
                  " skipped updates, " + std::to_string(skipped_segments) +
                  " skipped segments");
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

}  // namespace asvnav::cli
