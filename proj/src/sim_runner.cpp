#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "asvnav/errors.hpp"
#include "asvnav/mekf.hpp"
#include "asvnav/sim.hpp"

namespace asvnav::sim {
namespace {

double wrap_pi(double a) {
  const double r = std::remainder(a, 2.0 * M_PI);
  return r <= -M_PI ? r + 2.0 * M_PI : r;
}

struct InvariantDriver {
  inekf::FilterState s;
  inekf::ProcessNoise noise;
  double gate = 3.0;

  void predict(const inekf::ImuSample& imu, double dt) {
    s = inekf::predict(s, imu, dt, noise);
  }
  bool apply_rollpitch(const measurements::RollPitchReading& rp) {
    const auto res = measurements::apply(s, measurements::make_roll_pitch(rp), gate);
    s = res.state;
    return res.applied;
  }
  bool apply_heading(const measurements::HeadingReading& h) {
    const auto res = measurements::apply(s, measurements::make_heading(h), gate);
    s = res.state;
    return res.applied;
  }
  bool apply_full(const measurements::RollPitchReading& rp,
                  const measurements::HeadingReading& h) {
    const auto res =
        measurements::apply(s, measurements::make_reconstructed(rp, h), gate);
    s = res.state;
    return res.applied;
  }
  bool apply_gps(const measurements::GpsReading& g) {
    const auto res = measurements::apply(s, measurements::make_gps(g));
    s = res.state;
    return res.applied;
  }
  lie::ExtendedPose pose() const { return s.x_hat; }
  double nees(const lie::ExtendedPose& truth_pose) const {
    const Vec9 xi = lie::se23_log(truth_pose.inverse() * s.x_hat);
    return xi.dot(s.sigma_hat.ldlt().solve(xi));
  }
};

struct MekfDriver {
  mekf::MekfState s;
  inekf::ProcessNoise noise;

  void predict(const inekf::ImuSample& imu, double dt) {
    s = mekf::mekf_predict(s, imu, dt, noise);
  }
  bool apply_rollpitch(const measurements::RollPitchReading& rp) {
    const auto res = mekf::mekf_update_rollpitch(s, rp);
    s = res.state;
    return res.applied;
  }
  bool apply_heading(const measurements::HeadingReading& h) {
    const auto res = mekf::mekf_update_heading(s, h);
    s = res.state;
    return res.applied;
  }
  bool apply_full(const measurements::RollPitchReading& rp,
                  const measurements::HeadingReading& h) {
    // Sequential partial updates carry the same information as the
    // reconstructed rotation in this filter's Euler parametrization.
    const bool a = apply_rollpitch(rp);
    const bool b = apply_heading(h);
    return a && b;
  }
  bool apply_gps(const measurements::GpsReading& g) {
    const auto res = mekf::mekf_update_gps(s, g);
    s = res.state;
    return res.applied;
  }
  lie::ExtendedPose pose() const { return mean_pose(s); }
  double nees(const lie::ExtendedPose&) const {
    return std::numeric_limits<double>::quiet_NaN();
  }
};

// Updates that cannot be evaluated at the current belief (gimbal lock,
// unobservable innovation, log branch, out-of-range reading) are skipped and
// counted; the run continues on dead reckoning.
template <class Driver>
bool apply_event(Driver& d, const Event& e, int& skipped) {
  try {
    bool ok = true;
    switch (e.kind) {
      case EventKind::rollpitch:
        ok = d.apply_rollpitch(e.rp);
        break;
      case EventKind::heading:
        ok = d.apply_heading(e.heading);
        break;
      case EventKind::full:
        ok = d.apply_full(e.rp, e.heading);
        break;
      case EventKind::gps:
        ok = d.apply_gps(e.gps);
        break;
    }
    if (!ok) ++skipped;
    return ok;
  } catch (const DegenerateOrientationError&) {
  } catch (const UnobservableInnovationError&) {
  } catch (const LogBranchError&) {
  } catch (const std::invalid_argument&) {
  }
  ++skipped;
  return false;
}

bool pose_finite(const lie::ExtendedPose& x) {
  return x.r.matrix().allFinite() && x.v.allFinite() && x.p.allFinite();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (const double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

template <class Driver>
RunResult run_loop(Driver d, const std::vector<inekf::ImuSample>& imu,
                   const std::vector<Event>& events,
                   const std::vector<TruthState>* truth, const RunOptions& opt,
                   double t0) {
  if (truth != nullptr && truth->size() != imu.size() + 1) {
    throw std::invalid_argument("run_filter: truth and IMU grids disagree");
  }
  RunResult out;
  RunMetrics& m = out.metrics;
  const auto n = static_cast<std::int64_t>(imu.size());
  if (truth != nullptr) {
    const auto cap = static_cast<std::size_t>(n) + 1;
    m.roll_err.reserve(cap);
    m.pitch_err.reserve(cap);
    m.yaw_err.reserve(cap);
    m.orient_err.reserve(cap);
    m.z_err.reserve(cap);
    m.vel_err.reserve(cap);
    m.xy_err.reserve(cap);
  }

  const auto record = [&](std::int64_t k) {
    const lie::ExtendedPose est = d.pose();
    if (opt.record_estimates) out.estimates.push_back(est);
    if (!pose_finite(est)) {
      m.diverged = true;
      return false;
    }
    if (truth == nullptr) return true;
    const auto& tp = (*truth)[static_cast<std::size_t>(k)].pose;
    const Vec3 et = lie::euler_zyx(tp.r);
    const Vec3 ee = lie::euler_zyx(est.r);
    m.roll_err.push_back(std::abs(wrap_pi(ee[0] - et[0])));
    m.pitch_err.push_back(std::abs(wrap_pi(ee[1] - et[1])));
    m.yaw_err.push_back(std::abs(wrap_pi(ee[2] - et[2])));
    // Geodesic angle from the trace; safe at the pi branch where log is not.
    const double ct = 0.5 * ((tp.r.matrix().transpose() * est.r.matrix()).trace() - 1.0);
    m.orient_err.push_back(std::acos(std::clamp(ct, -1.0, 1.0)));
    m.z_err.push_back(std::abs(est.p[2] - tp.p[2]));
    m.vel_err.push_back((est.v - tp.v).norm());
    const double xy = (est.p - tp.p).head<2>().norm();
    m.xy_err.push_back(xy);
    if (opt.record_nees) {
      try {
        m.nees.push_back(d.nees(tp));
      } catch (const LogBranchError&) {
      }
    }
    if (xy > opt.divergence_xy_m) {
      m.diverged = true;
      return false;
    }
    return true;
  };

  bool alive = record(0);
  std::size_t ei = 0;
  double t_prev = t0;
  for (std::int64_t k = 1; k <= n && alive; ++k) {
    const auto& sample = imu[static_cast<std::size_t>(k - 1)];
    d.predict(sample, sample.t - t_prev);
    t_prev = sample.t;
    while (ei < events.size() && events[ei].k == k) {
      apply_event(d, events[ei], m.skipped_updates);
      ++ei;
    }
    alive = record(k);
  }

  m.mean_roll = mean_of(m.roll_err);
  m.mean_pitch = mean_of(m.pitch_err);
  m.mean_yaw = mean_of(m.yaw_err);
  m.mean_z = mean_of(m.z_err);
  m.mean_vel = mean_of(m.vel_err);
  m.mean_xy = mean_of(m.xy_err);
  m.mean_nees = mean_of(m.nees);
  return out;
}

}  // namespace

RunResult run_filter(FilterKind kind, const lie::ExtendedPose& x0,
                     const Mat9& sigma0, const std::vector<inekf::ImuSample>& imu,
                     const std::vector<Event>& events,
                     const std::vector<TruthState>* truth,
                     const RunOptions& options) {
  if (imu.empty()) throw std::invalid_argument("run_filter: empty IMU stream");
  const double t0 = truth != nullptr ? truth->front().t : 0.0;
  if (kind == FilterKind::inekf) {
    InvariantDriver d;
    d.s.x_hat = x0;
    d.s.sigma_hat = sigma0;
    d.s.t = t0;
    d.noise = options.noise;
    d.gate = options.gate_rad;
    return run_loop(std::move(d), imu, events, truth, options, t0);
  }
  MekfDriver d;
  d.s.q = Eigen::Quaterniond(x0.r.matrix());
  d.s.v = x0.v;
  d.s.p = x0.p;
  d.s.cov = sigma0;
  d.s.t = t0;
  d.noise = options.noise;
  RunOptions opt = options;
  opt.record_nees = false;  // NEES is defined on the invariant error state
  return run_loop(std::move(d), imu, events, truth, opt, t0);
}

std::vector<RunMetrics> run_monte_carlo(const MonteCarloConfig& config,
                                        FilterKind kind, MeasurementMode mode) {
  if (config.n_runs < 1) {
    throw std::invalid_argument("run_monte_carlo: n_runs must be >= 1");
  }
  SensorSchedule schedule = config.schedule;
  if (mode == MeasurementMode::partial_6hz) schedule.rollpitch_rate_hz = 6.0;

  const double dt = 1.0 / schedule.imu_rate_hz;
  const auto truth = generate_trajectory(config.duration_s, dt, config.trajectory);
  const auto n_steps = static_cast<std::int64_t>(truth.size()) - 1;
  const Mat9 sigma0 = init_covariance(config.init);

  RunOptions opt;
  opt.noise = inekf::ProcessNoise::from_sensor_stds(
      schedule.gyro_std, schedule.accel_std, schedule.imu_rate_hz);
  opt.divergence_xy_m = config.divergence_xy_m;
  opt.gate_rad = config.gate_rad;
  opt.record_nees = config.record_nees && kind == FilterKind::inekf;

  std::vector<RunMetrics> results(static_cast<std::size_t>(config.n_runs));
  const auto one_run = [&](int run) {
    // Per-run generator keyed by (seed, run): runs are independent of each
    // other and of how they are distributed over threads.
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed & 0xffffffffULL),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    const lie::ExtendedPose x0 = perturb_initial(truth.front().pose, config.init, rng);
    const SensorStream stream = simulate_sensors(truth, schedule, rng);
    const auto events = build_events(stream, mode, dt, n_steps);
    auto result = run_filter(kind, x0, sigma0, stream.imu, events, &truth, opt);
    result.metrics.run_index = run;
    results[static_cast<std::size_t>(run)] = std::move(result.metrics);
  };

  const int n_threads = std::clamp(config.n_threads, 1, config.n_runs);
  if (n_threads == 1) {
    for (int run = 0; run < config.n_runs; ++run) one_run(run);
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w] {
      for (int run = w; run < config.n_runs; run += n_threads) one_run(run);
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace asvnav::sim
