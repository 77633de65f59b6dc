#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "asvnav/horizon.hpp"
#include "asvnav/inekf.hpp"
#include "asvnav/measurements.hpp"

namespace asvnav::sim {

// Analytic straight-line cruise with sinusoidal wave-induced roll, pitch,
// and heave. Angular rate and specific force come from the closed-form
// derivatives of the pose trajectory.
struct TrajectoryParams {
  double speed_mps = 3.33;
  double heading_rad = 0.0;
  double roll_amp_rad = 5.0 * M_PI / 180.0;
  double roll_period_s = 4.0;
  double pitch_amp_rad = 5.0 * M_PI / 180.0;
  double pitch_period_s = 6.0;
  double heave_amp_m = 0.2;
  double heave_period_s = 5.0;
};

struct TruthState {
  double t = 0.0;
  lie::ExtendedPose pose;
  Vec3 omega_body = Vec3::Zero();
  Vec3 accel_body = Vec3::Zero();  // specific force (accelerometer reading)
};

// Sensor rates and noise magnitudes. Sample stds, not densities; the filter's
// process noise derives densities by dividing by the IMU rate. noise_scale
// multiplies the realized noise draws only, never the sigmas the readings
// report, so noise_scale = 0 yields exact readings with valid covariances.
struct SensorSchedule {
  double noise_scale = 1.0;
  double imu_rate_hz = 100.0;
  double gyro_std = 0.002;
  double accel_std = 0.04;
  bool gps_enabled = true;
  double gps_rate_hz = 1.0;
  double gps_sigma_xy = 1.75;
  double gps_sigma_z = 5.0;
  bool heading_enabled = true;
  double heading_rate_hz = 1.0;
  double heading_std = 1.0 * M_PI / 180.0;
  bool rollpitch_enabled = true;
  double rollpitch_rate_hz = 30.0;
  double rollpitch_std = 2.0 * M_PI / 180.0;
};

// Initial-perturbation stds: orientation applied as a random tangent-space
// rotation (isotropic per axis), clipped at angle pi - 0.1.
struct InitialPerturbation {
  double orientation_std_rad = 60.0 * M_PI / 180.0;
  double velocity_std = 4.0;
  double position_xy_std = 4.0;
  double position_z_std = 1.0;
};

struct SensorStream {
  // IMU samples are interval averages stamped at the interval end: the
  // sample with t = k*dt carries the mean rate/force over ((k-1)*dt, k*dt].
  std::vector<inekf::ImuSample> imu;
  std::vector<measurements::GpsReading> gps;
  std::vector<measurements::HeadingReading> heading;
  std::vector<measurements::RollPitchReading> rollpitch;
};

enum class FilterKind { inekf, mekf };

enum class MeasurementMode {
  partial_30hz,            // roll/pitch at the scheduled 30 Hz + heading + GPS
  partial_6hz,             // roll/pitch resampled to 6 Hz + heading + GPS
  reconstructed_full_1hz,  // full orientation from paired readings + GPS
  no_rollpitch,            // heading + GPS only
};

// One filter-input event on the IMU grid. kind doubles as processing order
// for events sharing a step.
enum class EventKind { rollpitch = 0, heading = 1, full = 2, gps = 3 };
struct Event {
  std::int64_t k = 0;
  EventKind kind = EventKind::rollpitch;
  measurements::RollPitchReading rp;
  measurements::HeadingReading heading;
  measurements::GpsReading gps;
};

struct RunMetrics {
  std::vector<double> roll_err, pitch_err, yaw_err;  // rad, one per grid step
  std::vector<double> orient_err;                    // geodesic rotation angle, rad
  std::vector<double> z_err, vel_err, xy_err;        // m, m/s, m
  std::vector<double> nees;                          // invariant filter only
  double mean_roll = 0, mean_pitch = 0, mean_yaw = 0;
  double mean_z = 0, mean_vel = 0, mean_xy = 0;
  double mean_nees = 0;
  bool diverged = false;
  int skipped_updates = 0;
  int run_index = 0;
};

struct MonteCarloConfig {
  int n_runs = 50;
  std::uint64_t seed = 1u;
  double duration_s = 30.0;
  TrajectoryParams trajectory;
  SensorSchedule schedule;
  InitialPerturbation init;
  double divergence_xy_m = 1e3;
  double gate_rad = 3.0;
  int n_threads = 1;
  bool record_nees = true;
};

struct MetricSummary {
  double mean = 0, median = 0, q1 = 0, q3 = 0;
};

struct Summary {
  int n_runs = 0;
  int diverged_count = 0;
  MetricSummary roll, pitch, yaw, z, vel, xy;
  double mean_nees = 0;
};

std::vector<TruthState> generate_trajectory(double duration_s, double dt,
                                            const TrajectoryParams& params);

// Noisy sensor streams on the truth grid. Identical seeds give bit-identical
// streams; the draw order is fixed per stream so toggling one sensor never
// shifts another's noise.
SensorStream simulate_sensors(const std::vector<TruthState>& truth,
                              const SensorSchedule& schedule,
                              std::mt19937_64& rng);
SensorStream simulate_sensors(const std::vector<TruthState>& truth,
                              const SensorSchedule& schedule,
                              std::uint64_t seed);

// Image of the geometric horizon for a camera rigidly mounted on the body
// (forward along body x), as a segment spanning the image width. Throws
// HorizonOutOfFrameError when either endpoint leaves the image.
horizon::Segment project_horizon_segment(const lie::ExtendedPose& truth_pose,
                                         const horizon::CameraIntrinsics& cam,
                                         const horizon::HorizonGeometry& geom);

// Measurement-mode transform: orders the stream's readings into grid events.
// The reconstructed mode pairs each heading with the nearest roll/pitch
// reading within 0.5 s and drops unpaired headings.
std::vector<Event> build_events(const SensorStream& stream, MeasurementMode mode,
                                double dt, std::int64_t n_steps);

// Random left-error perturbation of the truth pose; the returned pose has
// left error distributed as the diagonal covariance built by init_covariance.
lie::ExtendedPose perturb_initial(const lie::ExtendedPose& truth,
                                  const InitialPerturbation& init,
                                  std::mt19937_64& rng);
Mat9 init_covariance(const InitialPerturbation& init);

struct RunOptions {
  inekf::ProcessNoise noise;
  double divergence_xy_m = 1e3;
  double gate_rad = 3.0;
  bool record_nees = false;
  bool record_estimates = false;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<lie::ExtendedPose> estimates;  // when record_estimates is set
};

// Event-driven run of one filter over one IMU stream: predict to each IMU
// stamp (step sizes come from the stamps), then apply that step's events in
// EventKind order. truth may be null (replay); error metrics are then empty.
RunResult run_filter(FilterKind kind, const lie::ExtendedPose& x0,
                     const Mat9& sigma0, const std::vector<inekf::ImuSample>& imu,
                     const std::vector<Event>& events,
                     const std::vector<TruthState>* truth,
                     const RunOptions& options);

// Seeded, order-independent Monte-Carlo batch: run i draws its own RNG stream
// from (seed, i), so results are identical under any n_threads.
std::vector<RunMetrics> run_monte_carlo(const MonteCarloConfig& config,
                                        FilterKind kind, MeasurementMode mode);

// Mean/median/quartiles of per-run average errors over non-diverged runs
// (quantiles by linear interpolation), plus the divergence count.
Summary summarize(const std::vector<RunMetrics>& metrics);

}  // namespace asvnav::sim
