#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asvnav/horizon.hpp"
#include "asvnav/sim.hpp"

namespace asvnav::cli {

// Experiment document: Monte-Carlo settings plus the camera/horizon geometry
// used when replaying segment logs. Defaults depend on the command (the
// convergence study uses different filters, modes, and run counts than the
// accuracy study), so each command merges the file over its own base.
struct ExperimentConfig {
  sim::MonteCarloConfig mc;
  horizon::CameraIntrinsics cam{800.0, 360.0, 720, 1280};
  horizon::HorizonGeometry geom{2.0, 6.371e6, 0.0};
  std::vector<sim::FilterKind> filters;
  std::vector<sim::MeasurementMode> modes;
  std::string out_dir = "out";
};

ExperimentConfig default_montecarlo_config();
ExperimentConfig default_convergence_config();
ExperimentConfig default_replay_config();

const char* to_string(sim::FilterKind kind);
const char* to_string(sim::MeasurementMode mode);
sim::FilterKind filter_from_string(const std::string& name);
sim::MeasurementMode mode_from_string(const std::string& name);

// Strict JSON loader: unknown keys, wrong types, and out-of-range values
// raise ConfigError naming the offending key path; syntax errors report the
// line. An empty path returns the base untouched.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);

// Effective configuration (defaults applied) as a JSON document; re-loading
// it over any base reproduces the same configuration.
std::string config_to_json(const ExperimentConfig& config);

// Command-line overrides applied after the file.
struct CliOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  bool quiet = false;
};

// Sensor log rows: (t, sensor, values...) CSV with one row per sample.
// Segment rows carry raw pixel endpoints and go through the horizon pipeline
// at replay time; the other kinds map directly onto the sensor stream.
struct SensorLog {
  sim::SensorStream stream;
  std::vector<std::pair<double, horizon::Segment>> segments;
};

// Values are written with enough digits to round-trip doubles exactly, so an
// exported log replays bit-identically.
void write_sensor_log(const sim::SensorStream& stream, const std::string& path);

// Throws ConfigError naming the 1-based row of the first malformed line.
// Measurement sigmas are not part of the log; replay takes them from config.
SensorLog read_sensor_log(const std::string& path);

int cmd_montecarlo(const std::string& config_path, const CliOptions& opts);
int cmd_convergence(const std::string& config_path, const CliOptions& opts);
int cmd_replay(const std::string& log_path, const std::string& config_path,
               const CliOptions& opts);

}  // namespace asvnav::cli
