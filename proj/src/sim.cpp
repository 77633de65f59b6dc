#include "asvnav/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "asvnav/errors.hpp"

namespace asvnav::sim {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Sinusoid with closed-form derivatives. Zero amplitude or period degenerates
// to the constant zero signal.
struct Wave {
  double amp = 0.0;
  double omega = 0.0;

  Wave(double amplitude, double period_s) {
    if (amplitude != 0.0 && period_s > 0.0) {
      amp = amplitude;
      omega = 2.0 * M_PI / period_s;
    }
  }
  double value(double t) const { return amp * std::sin(omega * t); }
  double rate(double t) const { return amp * omega * std::cos(omega * t); }
  double accel(double t) const { return -amp * omega * omega * std::sin(omega * t); }
};

TruthState truth_at(double t, const TrajectoryParams& params, const Wave& roll,
                    const Wave& pitch, const Wave& heave) {
  const double phi = roll.value(t);
  const double theta = pitch.value(t);
  const double cpsi = std::cos(params.heading_rad);
  const double spsi = std::sin(params.heading_rad);

  TruthState s;
  s.t = t;
  s.pose.r = lie::from_euler_zyx(phi, theta, params.heading_rad);
  s.pose.p = Vec3(params.speed_mps * t * cpsi, params.speed_mps * t * spsi,
                  heave.value(t));
  s.pose.v = Vec3(params.speed_mps * cpsi, params.speed_mps * spsi, heave.rate(t));

  // Body rates for Euler trajectory (phi(t), theta(t), psi const).
  const double phid = roll.rate(t);
  const double thetad = pitch.rate(t);
  s.omega_body = Vec3(phid, std::cos(phi) * thetad, -std::sin(phi) * thetad);

  // Accelerometer reads specific force: R^T (a_world - g).
  const Vec3 a_world(0.0, 0.0, heave.accel(t));
  s.accel_body = s.pose.r.matrix().transpose() * (a_world - inekf::gravity());
  return s;
}

// Grid indices of the samples of a sensor running at rate_hz, snapped to the
// integration grid (indices 1..n). Nominal times i/rate land on the nearest
// grid step; sub-grid rates never produce duplicate indices.
std::vector<std::int64_t> sample_steps(double rate_hz, double dt, std::int64_t n) {
  std::vector<std::int64_t> steps;
  if (rate_hz <= 0.0) return steps;
  for (std::int64_t i = 1;; ++i) {
    const auto k = std::llround(static_cast<double>(i) / (rate_hz * dt));
    if (k > n) break;
    if (k >= 1 && (steps.empty() || steps.back() != k)) steps.push_back(k);
  }
  return steps;
}

double wrap_pi(double a) {
  const double r = std::remainder(a, 2.0 * M_PI);
  return r <= -M_PI ? r + 2.0 * M_PI : r;
}

// Linear interpolation quantile of a sorted vector, p in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricSummary summarize_metric(std::vector<double> values) {
  MetricSummary out;
  if (values.empty()) {
    out.mean = out.median = out.q1 = out.q3 =
        std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (const double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  out.q1 = quantile_sorted(values, 0.25);
  out.median = quantile_sorted(values, 0.5);
  out.q3 = quantile_sorted(values, 0.75);
  return out;
}

}  // namespace

std::vector<TruthState> generate_trajectory(double duration_s, double dt,
                                            const TrajectoryParams& params) {
  require(std::isfinite(duration_s) && duration_s > 0.0,
          "generate_trajectory: duration must be positive");
  require(std::isfinite(dt) && dt > 0.0 && dt <= duration_s,
          "generate_trajectory: dt must be in (0, duration]");
  require(params.roll_amp_rad == 0.0 || params.roll_period_s > 0.0,
          "generate_trajectory: roll period must be positive");
  require(params.pitch_amp_rad == 0.0 || params.pitch_period_s > 0.0,
          "generate_trajectory: pitch period must be positive");
  require(params.heave_amp_m == 0.0 || params.heave_period_s > 0.0,
          "generate_trajectory: heave period must be positive");

  const Wave roll(params.roll_amp_rad, params.roll_period_s);
  const Wave pitch(params.pitch_amp_rad, params.pitch_period_s);
  const Wave heave(params.heave_amp_m, params.heave_period_s);

  const auto n = std::llround(duration_s / dt);
  std::vector<TruthState> truth;
  truth.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    truth.push_back(truth_at(static_cast<double>(k) * dt, params, roll, pitch, heave));
  }
  return truth;
}

SensorStream simulate_sensors(const std::vector<TruthState>& truth,
                              const SensorSchedule& schedule,
                              std::mt19937_64& rng) {
  require(truth.size() >= 2, "simulate_sensors: need at least two truth samples");
  const double dt = truth[1].t - truth[0].t;
  require(dt > 0.0, "simulate_sensors: truth grid must be increasing");
  const auto n = static_cast<std::int64_t>(truth.size()) - 1;

  // One sub-generator per stream, seeded up front in a fixed order, so
  // toggling or retiming one sensor leaves every other stream's draws intact.
  std::array<std::uint64_t, 4> sub_seed{};
  for (auto& s : sub_seed) s = rng();

  const double ns = schedule.noise_scale;
  SensorStream out;
  {
    std::mt19937_64 r(sub_seed[0]);
    std::normal_distribution<double> n01;
    out.imu.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      inekf::ImuSample s;
      s.gyro = 0.5 * (truth[ku - 1].omega_body + truth[ku].omega_body);
      s.accel = 0.5 * (truth[ku - 1].accel_body + truth[ku].accel_body);
      for (int i = 0; i < 3; ++i) s.gyro[i] += ns * schedule.gyro_std * n01(r);
      for (int i = 0; i < 3; ++i) s.accel[i] += ns * schedule.accel_std * n01(r);
      s.t = truth[ku].t;
      out.imu.push_back(s);
    }
  }
  if (schedule.gps_enabled) {
    std::mt19937_64 r(sub_seed[1]);
    std::normal_distribution<double> n01;
    for (const auto k : sample_steps(schedule.gps_rate_hz, dt, n)) {
      const auto& ts = truth[static_cast<std::size_t>(k)];
      measurements::GpsReading g;
      g.xyz = ts.pose.p + ns * Vec3(schedule.gps_sigma_xy * n01(r),
                                    schedule.gps_sigma_xy * n01(r),
                                    schedule.gps_sigma_z * n01(r));
      g.sigma_xy = schedule.gps_sigma_xy;
      g.sigma_z = schedule.gps_sigma_z;
      g.t = ts.t;
      out.gps.push_back(g);
    }
  }
  if (schedule.heading_enabled) {
    std::mt19937_64 r(sub_seed[2]);
    std::normal_distribution<double> n01;
    for (const auto k : sample_steps(schedule.heading_rate_hz, dt, n)) {
      const auto& ts = truth[static_cast<std::size_t>(k)];
      measurements::HeadingReading h;
      h.psi = wrap_pi(lie::yaw_of(ts.pose.r) + ns * schedule.heading_std * n01(r));
      h.sigma_psi = schedule.heading_std;
      h.t = ts.t;
      out.heading.push_back(h);
    }
  }
  if (schedule.rollpitch_enabled) {
    std::mt19937_64 r(sub_seed[3]);
    std::normal_distribution<double> n01;
    for (const auto k : sample_steps(schedule.rollpitch_rate_hz, dt, n)) {
      const auto& ts = truth[static_cast<std::size_t>(k)];
      const Vec3 euler = lie::euler_zyx(ts.pose.r);
      measurements::RollPitchReading rp;
      rp.phi = euler[0] + ns * schedule.rollpitch_std * n01(r);
      rp.theta = euler[1] + ns * schedule.rollpitch_std * n01(r);
      rp.sigma_phi = schedule.rollpitch_std;
      rp.sigma_theta = schedule.rollpitch_std;
      rp.t = ts.t;
      out.rollpitch.push_back(rp);
    }
  }
  return out;
}

SensorStream simulate_sensors(const std::vector<TruthState>& truth,
                              const SensorSchedule& schedule,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate_sensors(truth, schedule, rng);
}

horizon::Segment project_horizon_segment(const lie::ExtendedPose& truth_pose,
                                         const horizon::CameraIntrinsics& cam,
                                         const horizon::HorizonGeometry& geom) {
  require(cam.f_y > 0.0 && cam.image_width > 0 && cam.image_height > 0,
          "project_horizon_segment: invalid camera");
  const double alpha = horizon::horizon_inclination(geom);
  const double cd = std::sin(alpha);   // cos(dip)
  const double sd = std::cos(alpha);   // sin(dip)

  // Camera attitude: body attitude composed with the nose-up mount offset.
  const Mat3 rc = truth_pose.r.matrix() * lie::rot_y(-geom.mount_pitch).matrix();
  // World axes expressed in the camera frame (rows of the attitude matrix).
  const Vec3 e1 = rc.row(0), e2 = rc.row(1), e3 = rc.row(2);

  const double f = cam.f_y;
  const double cx = 0.5 * cam.image_width;

  // Horizon directions in the world frame: d(beta) = (cd cos, cd sin, -sd).
  // A pixel column u fixes the ratio d_y/d_x in the camera frame, which is
  // linear in (cos(beta), sin(beta)); image-x runs along body +y.
  auto endpoint = [&](double u) {
    const double du = u - cx;
    const double a = cd * (f * e1[1] - du * e1[0]);
    const double b = cd * (f * e2[1] - du * e2[0]);
    const double c = sd * (f * e3[1] - du * e3[0]);
    const double r2 = std::hypot(a, b);
    if (!(r2 > std::abs(c))) {
      throw HorizonOutOfFrameError("horizon does not cross image column");
    }
    const double gamma = std::atan2(b, a);
    const double half = std::acos(std::clamp(c / r2, -1.0, 1.0));

    double best_x = 0.0, best_v = 0.0;
    for (const double beta : {gamma + half, gamma - half}) {
      const double cb = std::cos(beta), sb = std::sin(beta);
      const Vec3 d = cd * (cb * e1 + sb * e2) - sd * e3;
      if (d[0] > best_x) {
        best_x = d[0];
        best_v = cam.c_y - f * d[2] / d[0];
      }
    }
    if (best_x <= 0.0) {
      throw HorizonOutOfFrameError("horizon is behind the camera");
    }
    if (best_v < 0.0 || best_v > cam.image_height) {
      throw HorizonOutOfFrameError("horizon leaves the image vertically");
    }
    return Eigen::Vector2d(u, best_v);
  };

  horizon::Segment seg;
  seg.p0 = endpoint(0.0);
  seg.p1 = endpoint(static_cast<double>(cam.image_width));
  return seg;
}

std::vector<Event> build_events(const SensorStream& stream, MeasurementMode mode,
                                double dt, std::int64_t n_steps) {
  require(dt > 0.0, "build_events: dt must be positive");
  std::vector<Event> events;
  const auto step_of = [&](double t) { return std::llround(t / dt); };
  const auto in_range = [&](std::int64_t k) { return k >= 1 && k <= n_steps; };

  const bool partial = mode == MeasurementMode::partial_30hz ||
                       mode == MeasurementMode::partial_6hz;
  if (partial) {
    for (const auto& rp : stream.rollpitch) {
      if (!in_range(step_of(rp.t))) continue;
      Event e;
      e.k = step_of(rp.t);
      e.kind = EventKind::rollpitch;
      e.rp = rp;
      events.push_back(e);
    }
  }
  if (mode != MeasurementMode::reconstructed_full_1hz) {
    for (const auto& h : stream.heading) {
      if (!in_range(step_of(h.t))) continue;
      Event e;
      e.k = step_of(h.t);
      e.kind = EventKind::heading;
      e.heading = h;
      events.push_back(e);
    }
  } else {
    // Pair each heading with the nearest roll/pitch reading within 0.5 s;
    // unpaired headings are dropped.
    for (const auto& h : stream.heading) {
      if (!in_range(step_of(h.t))) continue;
      const measurements::RollPitchReading* best = nullptr;
      double best_gap = 0.5;
      for (const auto& rp : stream.rollpitch) {
        const double gap = std::abs(rp.t - h.t);
        if (gap <= best_gap) {
          best_gap = gap;
          best = &rp;
        }
      }
      if (best == nullptr) continue;
      Event e;
      e.k = step_of(h.t);
      e.kind = EventKind::full;
      e.rp = *best;
      e.heading = h;
      events.push_back(e);
    }
  }
  for (const auto& g : stream.gps) {
    if (!in_range(step_of(g.t))) continue;
    Event e;
    e.k = step_of(g.t);
    e.kind = EventKind::gps;
    e.gps = g;
    events.push_back(e);
  }

  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.k != b.k) return a.k < b.k;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return events;
}

Mat9 init_covariance(const InitialPerturbation& init) {
  Vec9 d;
  d << init.orientation_std_rad, init.orientation_std_rad, init.orientation_std_rad,
      init.velocity_std, init.velocity_std, init.velocity_std,
      init.position_xy_std, init.position_xy_std, init.position_z_std;
  return d.cwiseProduct(d).asDiagonal();
}

lie::ExtendedPose perturb_initial(const lie::ExtendedPose& truth,
                                  const InitialPerturbation& init,
                                  std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec9 xi;
  for (int i = 0; i < 9; ++i) xi[i] = n01(rng);
  xi.head<3>() *= init.orientation_std_rad;
  xi.segment<3>(3) *= init.velocity_std;
  xi[6] *= init.position_xy_std;
  xi[7] *= init.position_xy_std;
  xi[8] *= init.position_z_std;

  // The rotation log lives on |w| < pi; keep clear of the branch point.
  const double max_angle = M_PI - 0.1;
  const double angle = xi.head<3>().norm();
  if (angle > max_angle) xi.head<3>() *= max_angle / angle;

  return truth * lie::se23_exp(xi);
}

Summary summarize(const std::vector<RunMetrics>& metrics) {
  require(!metrics.empty(), "summarize: no runs");
  Summary out;
  out.n_runs = static_cast<int>(metrics.size());

  std::vector<double> roll, pitch, yaw, z, vel, xy;
  double nees_sum = 0.0;
  int nees_count = 0;
  for (const auto& m : metrics) {
    if (m.diverged) {
      ++out.diverged_count;
      continue;
    }
    roll.push_back(m.mean_roll);
    pitch.push_back(m.mean_pitch);
    yaw.push_back(m.mean_yaw);
    z.push_back(m.mean_z);
    vel.push_back(m.mean_vel);
    xy.push_back(m.mean_xy);
    if (!m.nees.empty()) {
      nees_sum += m.mean_nees;
      ++nees_count;
    }
  }
  out.roll = summarize_metric(std::move(roll));
  out.pitch = summarize_metric(std::move(pitch));
  out.yaw = summarize_metric(std::move(yaw));
  out.z = summarize_metric(std::move(z));
  out.vel = summarize_metric(std::move(vel));
  out.xy = summarize_metric(std::move(xy));
  out.mean_nees = nees_count > 0 ? nees_sum / nees_count
                                 : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace asvnav::sim
