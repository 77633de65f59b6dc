#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "asvnav/errors.hpp"
#include "asvnav/sim.hpp"

using namespace asvnav;

namespace {

constexpr double kDeg = M_PI / 180.0;

sim::SensorSchedule zero_noise_schedule() {
  sim::SensorSchedule s;
  s.noise_scale = 0.0;  // exact readings, sigmas keep their defaults
  return s;
}

horizon::CameraIntrinsics test_cam() {
  horizon::CameraIntrinsics cam;
  cam.f_y = 800.0;
  cam.c_y = 360.0;
  cam.image_height = 720;
  cam.image_width = 1280;
  return cam;
}

horizon::HorizonGeometry test_geom(double v = 2.0) {
  horizon::HorizonGeometry g;
  g.camera_height_v = v;
  return g;
}

double sample_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

bool same_stream(const sim::SensorStream& a, const sim::SensorStream& b) {
  if (a.imu.size() != b.imu.size() || a.gps.size() != b.gps.size() ||
      a.heading.size() != b.heading.size() ||
      a.rollpitch.size() != b.rollpitch.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.imu.size(); ++i) {
    if (a.imu[i].gyro != b.imu[i].gyro || a.imu[i].accel != b.imu[i].accel ||
        a.imu[i].t != b.imu[i].t) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.gps.size(); ++i) {
    if (a.gps[i].xyz != b.gps[i].xyz || a.gps[i].t != b.gps[i].t) return false;
  }
  for (std::size_t i = 0; i < a.heading.size(); ++i) {
    if (a.heading[i].psi != b.heading[i].psi || a.heading[i].t != b.heading[i].t) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.rollpitch.size(); ++i) {
    if (a.rollpitch[i].phi != b.rollpitch[i].phi ||
        a.rollpitch[i].theta != b.rollpitch[i].theta ||
        a.rollpitch[i].t != b.rollpitch[i].t) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("trajectory covers the commanded straight-line distance") {
  const sim::TrajectoryParams params;
  const auto truth = sim::generate_trajectory(30.0, 0.01, params);
  REQUIRE(truth.size() == 3001);
  CHECK(truth.front().t == 0.0);
  CHECK(truth.back().t == doctest::Approx(30.0));

  const Vec3 disp = truth.back().pose.p - truth.front().pose.p;
  CHECK(disp.head<2>().norm() == doctest::Approx(99.9).epsilon(0.01));
  CHECK(std::abs(disp[1]) < 1e-9);  // default heading is along +x
  for (const auto& s : truth) CHECK(std::abs(s.pose.p[2]) <= params.heave_amp_m + 1e-12);
}

TEST_CASE("zero wave amplitudes give a level constant-attitude trajectory") {
  sim::TrajectoryParams params;
  params.roll_amp_rad = 0.0;
  params.pitch_amp_rad = 0.0;
  params.heave_amp_m = 0.0;
  const auto truth = sim::generate_trajectory(5.0, 0.01, params);
  for (const auto& s : truth) {
    REQUIRE((s.pose.r.matrix() - Mat3::Identity()).norm() == 0.0);
    REQUIRE(s.omega_body.norm() == 0.0);
    REQUIRE((s.accel_body - Vec3(0.0, 0.0, 9.81)).norm() < 1e-15);
    REQUIRE(s.pose.p[2] == 0.0);
  }
}

TEST_CASE("roll and pitch follow the commanded sinusoids") {
  sim::TrajectoryParams params;
  const auto truth = sim::generate_trajectory(12.0, 0.01, params);
  double max_roll = 0.0;
  for (const auto& s : truth) {
    const Vec3 euler = lie::euler_zyx(s.pose.r);
    const double want_roll =
        params.roll_amp_rad * std::sin(2.0 * M_PI * s.t / params.roll_period_s);
    const double want_pitch =
        params.pitch_amp_rad * std::sin(2.0 * M_PI * s.t / params.pitch_period_s);
    REQUIRE(std::abs(euler[0] - want_roll) < 1e-12);
    REQUIRE(std::abs(euler[1] - want_pitch) < 1e-12);
    REQUIRE(std::abs(euler[2]) < 1e-12);
    max_roll = std::max(max_roll, std::abs(euler[0]));
  }
  CHECK(max_roll == doctest::Approx(5.0 * kDeg).epsilon(1e-4));
}

TEST_CASE("finite differences of the poses match the analytic derivatives") {
  const auto truth = sim::generate_trajectory(10.0, 0.01, {});
  for (std::size_t k = 0; k + 1 < truth.size(); ++k) {
    const auto& a = truth[k];
    const auto& b = truth[k + 1];
    const double dt = b.t - a.t;

    const Vec3 w_fd = lie::so3_log(a.pose.r.inverse() * b.pose.r) / dt;
    const Vec3 w_mid = 0.5 * (a.omega_body + b.omega_body);
    REQUIRE((w_fd - w_mid).norm() < 1e-3);

    const Vec3 v_fd = (b.pose.p - a.pose.p) / dt;
    const Vec3 v_mid = 0.5 * (a.pose.v + b.pose.v);
    REQUIRE((v_fd - v_mid).norm() < 1e-3);

    const Vec3 acc_fd = (b.pose.v - a.pose.v) / dt;
    const Vec3 acc_a = a.pose.r * a.accel_body + inekf::gravity();
    const Vec3 acc_b = b.pose.r * b.accel_body + inekf::gravity();
    REQUIRE((acc_fd - 0.5 * (acc_a + acc_b)).norm() < 1e-3);
  }
}

TEST_CASE("integrating the noiseless IMU stream reproduces the truth poses") {
  const auto truth = sim::generate_trajectory(30.0, 0.01, {});
  const auto stream = sim::simulate_sensors(truth, zero_noise_schedule(), 1u);
  REQUIRE(stream.imu.size() == truth.size() - 1);

  inekf::FilterState x;
  x.x_hat = truth.front().pose;
  x.t = truth.front().t;
  const inekf::ProcessNoise no_noise;
  double worst_pos = 0.0, worst_ang = 0.0;
  for (std::size_t k = 0; k < stream.imu.size(); ++k) {
    x = inekf::predict(x, stream.imu[k], stream.imu[k].t - x.t, no_noise);
    const auto& tp = truth[k + 1].pose;
    worst_pos = std::max(worst_pos, (x.x_hat.p - tp.p).norm());
    worst_ang = std::max(
        worst_ang, lie::so3_log(tp.r.inverse() * x.x_hat.r).norm());
  }
  CHECK(worst_pos < 0.1);
  CHECK(worst_ang < 0.5 * kDeg);
}

TEST_CASE("sensor streams are seed-reproducible and per-stream decoupled") {
  const auto truth = sim::generate_trajectory(10.0, 0.01, {});
  const sim::SensorSchedule sched;

  const auto a = sim::simulate_sensors(truth, sched, 99u);
  const auto b = sim::simulate_sensors(truth, sched, 99u);
  CHECK(same_stream(a, b));
  const auto c = sim::simulate_sensors(truth, sched, 100u);
  CHECK(!same_stream(a, c));

  // Disabling one sensor must not shift the draws of the others.
  sim::SensorSchedule no_gps = sched;
  no_gps.gps_enabled = false;
  const auto d = sim::simulate_sensors(truth, no_gps, 99u);
  CHECK(d.gps.empty());
  REQUIRE(d.heading.size() == a.heading.size());
  for (std::size_t i = 0; i < a.heading.size(); ++i) {
    REQUIRE(d.heading[i].psi == a.heading[i].psi);
  }
  REQUIRE(d.rollpitch.size() == a.rollpitch.size());
  for (std::size_t i = 0; i < a.rollpitch.size(); ++i) {
    REQUIRE(d.rollpitch[i].phi == a.rollpitch[i].phi);
  }

  // Resampling roll/pitch (the 6 Hz mode) leaves the IMU stream untouched.
  sim::SensorSchedule slow_rp = sched;
  slow_rp.rollpitch_rate_hz = 6.0;
  const auto e = sim::simulate_sensors(truth, slow_rp, 99u);
  REQUIRE(e.imu.size() == a.imu.size());
  for (std::size_t i = 0; i < a.imu.size(); ++i) {
    REQUIRE(e.imu[i].gyro == a.imu[i].gyro);
    REQUIRE(e.imu[i].accel == a.imu[i].accel);
  }
  CHECK(e.rollpitch.size() < a.rollpitch.size());
}

TEST_CASE("zero noise makes the readings exact truth projections") {
  const auto truth = sim::generate_trajectory(5.0, 0.01, {});
  const auto s = sim::simulate_sensors(truth, zero_noise_schedule(), 3u);

  REQUIRE(s.imu.size() == truth.size() - 1);
  for (std::size_t k = 0; k < s.imu.size(); ++k) {
    const Vec3 w_avg = 0.5 * (truth[k].omega_body + truth[k + 1].omega_body);
    const Vec3 a_avg = 0.5 * (truth[k].accel_body + truth[k + 1].accel_body);
    REQUIRE(s.imu[k].gyro == w_avg);
    REQUIRE(s.imu[k].accel == a_avg);
    REQUIRE(s.imu[k].t == truth[k + 1].t);
  }
  REQUIRE(s.gps.size() == 5);
  for (const auto& g : s.gps) {
    const auto k = static_cast<std::size_t>(std::llround(g.t / 0.01));
    REQUIRE(g.xyz == truth[k].pose.p);
  }
  REQUIRE(s.heading.size() == 5);
  for (const auto& h : s.heading) {
    const auto k = static_cast<std::size_t>(std::llround(h.t / 0.01));
    REQUIRE(h.psi == doctest::Approx(lie::yaw_of(truth[k].pose.r)).epsilon(1e-15));
  }
  REQUIRE(s.rollpitch.size() == 150);
  for (const auto& rp : s.rollpitch) {
    const auto k = static_cast<std::size_t>(std::llround(rp.t / 0.01));
    const Vec3 euler = lie::euler_zyx(truth[k].pose.r);
    REQUIRE(rp.phi == euler[0]);
    REQUIRE(rp.theta == euler[1]);
  }
}

TEST_CASE("sensor noise magnitudes match the schedule") {
  sim::TrajectoryParams params;
  const auto truth = sim::generate_trajectory(100.0, 0.01, params);
  sim::SensorSchedule sched;
  sched.heading_rate_hz = 100.0;  // dense streams for tight std estimates
  sched.rollpitch_rate_hz = 30.0;
  sched.gps_rate_hz = 10.0;
  const auto s = sim::simulate_sensors(truth, sched, 2024u);

  std::vector<double> dpsi, dphi, dx;
  for (const auto& h : s.heading) {
    const auto k = static_cast<std::size_t>(std::llround(h.t / 0.01));
    dpsi.push_back(h.psi - lie::yaw_of(truth[k].pose.r));
  }
  for (const auto& rp : s.rollpitch) {
    const auto k = static_cast<std::size_t>(std::llround(rp.t / 0.01));
    dphi.push_back(rp.phi - lie::euler_zyx(truth[k].pose.r)[0]);
  }
  for (const auto& g : s.gps) {
    const auto k = static_cast<std::size_t>(std::llround(g.t / 0.01));
    dx.push_back(g.xyz[0] - truth[k].pose.p[0]);
  }
  REQUIRE(dpsi.size() == 10000);
  CHECK(sample_std(dpsi) == doctest::Approx(1.0 * kDeg).epsilon(0.05));
  CHECK(sample_std(dphi) == doctest::Approx(2.0 * kDeg).epsilon(0.05));
  CHECK(sample_std(dx) == doctest::Approx(1.75).epsilon(0.10));
}

TEST_CASE("level-pose horizon projects at the dip offset below center") {
  const auto cam = test_cam();
  const auto geom = test_geom(2.0);
  const double dip = M_PI / 2.0 - horizon::horizon_inclination(geom);

  const auto seg = sim::project_horizon_segment(lie::ExtendedPose::identity(), cam, geom);
  CHECK(seg.p0.x() == 0.0);
  CHECK(seg.p1.x() == 1280.0);
  CHECK(std::abs(seg.p0.y() - seg.p1.y()) < 1e-9);  // symmetric at zero roll
  CHECK(std::abs(seg.p0.y() - (cam.c_y + cam.f_y * std::tan(dip))) < 0.25);
  CHECK(seg.p0.y() > cam.c_y);  // horizon sits below center, never above
}

TEST_CASE("rolled-pose horizon slope recovers the roll angle") {
  const auto cam = test_cam();
  const auto geom = test_geom(2.0);
  lie::ExtendedPose pose;
  pose.r = lie::rot_x(0.1);
  const auto seg = sim::project_horizon_segment(pose, cam, geom);
  CHECK(horizon::roll_from_segment(seg) == doctest::Approx(0.1).epsilon(2e-3));

  pose.r = lie::rot_x(-0.25);
  const auto seg2 = sim::project_horizon_segment(pose, cam, geom);
  CHECK(horizon::roll_from_segment(seg2) == doctest::Approx(-0.25).epsilon(2e-3));
}

TEST_CASE("horizon leaves the frame beyond the half field of view") {
  const auto cam = test_cam();
  const auto geom = test_geom(2.0);
  lie::ExtendedPose pose;
  pose.r = lie::rot_y(0.5);  // nose down by ~28.6 deg; half FOV is 24.2 deg
  CHECK_THROWS_AS(sim::project_horizon_segment(pose, cam, geom),
                  HorizonOutOfFrameError);
  pose.r = lie::rot_y(-0.5);
  CHECK_THROWS_AS(sim::project_horizon_segment(pose, cam, geom),
                  HorizonOutOfFrameError);
}

TEST_CASE("projector and reading pipeline round-trip the attitude") {
  const auto cam = test_cam();
  for (const double v : {1.0, 2.0, 3.0}) {
    const auto geom = test_geom(v);
    for (int ri = -2; ri <= 2; ++ri) {
      for (int pi = -2; pi <= 2; ++pi) {
        const double roll = 5.0 * kDeg * ri;
        const double pitch = 2.5 * kDeg * pi;
        lie::ExtendedPose pose;
        pose.r = lie::from_euler_zyx(roll, pitch, 0.7);  // yaw must not matter
        const auto seg = sim::project_horizon_segment(pose, cam, geom);
        const auto reading =
            horizon::horizon_to_reading({seg}, cam, geom, 2.0 * kDeg);
        REQUIRE(std::abs(reading.phi - roll) < 0.1 * kDeg);
        REQUIRE(std::abs(reading.theta - pitch) < 0.1 * kDeg);
      }
    }
  }
}

TEST_CASE("camera height sweep shifts recovered pitch by less than a pixel") {
  const auto cam = test_cam();
  std::vector<double> thetas;
  for (const double v : {1.0, 1.5, 2.0, 2.5, 3.0}) {
    const auto geom = test_geom(v);
    const auto seg =
        sim::project_horizon_segment(lie::ExtendedPose::identity(), cam, geom);
    thetas.push_back(horizon::horizon_to_reading({seg}, cam, geom, 0.01).theta);
  }
  const auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
  CHECK(*hi - *lo < std::atan2(1.0, cam.f_y));
}

TEST_CASE("event streams follow the measurement-mode definitions") {
  const auto truth = sim::generate_trajectory(5.0, 0.01, {});
  const auto stream = sim::simulate_sensors(truth, sim::SensorSchedule{}, 5u);
  const auto n = static_cast<std::int64_t>(truth.size()) - 1;

  const auto partial =
      sim::build_events(stream, sim::MeasurementMode::partial_30hz, 0.01, n);
  CHECK(partial.size() ==
        stream.rollpitch.size() + stream.heading.size() + stream.gps.size());
  for (std::size_t i = 1; i < partial.size(); ++i) {
    const bool ordered =
        partial[i - 1].k < partial[i].k ||
        (partial[i - 1].k == partial[i].k &&
         static_cast<int>(partial[i - 1].kind) <= static_cast<int>(partial[i].kind));
    REQUIRE(ordered);
  }

  const auto recon = sim::build_events(
      stream, sim::MeasurementMode::reconstructed_full_1hz, 0.01, n);
  std::size_t full_count = 0;
  for (const auto& e : recon) {
    REQUIRE(e.kind != sim::EventKind::rollpitch);
    REQUIRE(e.kind != sim::EventKind::heading);
    if (e.kind == sim::EventKind::full) {
      ++full_count;
      REQUIRE(std::abs(e.rp.t - e.heading.t) <= 0.5);
    }
  }
  CHECK(full_count == stream.heading.size());

  const auto bare =
      sim::build_events(stream, sim::MeasurementMode::no_rollpitch, 0.01, n);
  CHECK(bare.size() == stream.heading.size() + stream.gps.size());
  for (const auto& e : bare) REQUIRE(e.kind != sim::EventKind::rollpitch);
}

TEST_CASE("reconstruction pairs each heading with the nearest roll/pitch") {
  sim::SensorStream s;
  measurements::HeadingReading h;
  h.psi = 0.3;
  h.sigma_psi = 0.02;
  h.t = 1.0;
  s.heading.push_back(h);
  for (const double t : {0.90, 1.04, 1.30}) {
    measurements::RollPitchReading rp;
    rp.sigma_phi = rp.sigma_theta = 0.03;
    rp.t = t;
    s.rollpitch.push_back(rp);
  }
  const auto events =
      sim::build_events(s, sim::MeasurementMode::reconstructed_full_1hz, 0.01, 1000);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == sim::EventKind::full);
  CHECK(events[0].rp.t == 1.04);

  // A heading with no roll/pitch within 0.5 s is dropped.
  sim::SensorStream lone;
  h.t = 3.0;
  lone.heading.push_back(h);
  measurements::RollPitchReading far_rp;
  far_rp.sigma_phi = far_rp.sigma_theta = 0.03;
  far_rp.t = 1.0;
  lone.rollpitch.push_back(far_rp);
  CHECK(sim::build_events(lone, sim::MeasurementMode::reconstructed_full_1hz, 0.01, 1000)
            .empty());
}

TEST_CASE("initial perturbation clips the rotation short of the log branch") {
  std::mt19937_64 rng(11u);
  sim::InitialPerturbation init;
  init.orientation_std_rad = 3.0;  // force frequent clipping
  lie::ExtendedPose truth;
  truth.r = lie::rot_z(0.4);
  double max_angle = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto x0 = sim::perturb_initial(truth, init, rng);
    const double angle = lie::so3_log(truth.r.inverse() * x0.r).norm();
    REQUIRE(angle <= M_PI - 0.1 + 1e-9);
    max_angle = std::max(max_angle, angle);
  }
  CHECK(max_angle > M_PI - 0.2);  // the clip is actually exercised

  const Mat9 sigma0 = sim::init_covariance(sim::InitialPerturbation{});
  CHECK(sigma0(0, 0) == doctest::Approx(std::pow(60.0 * kDeg, 2)));
  CHECK(sigma0(3, 3) == doctest::Approx(16.0));
  CHECK(sigma0(6, 6) == doctest::Approx(16.0));
  CHECK(sigma0(8, 8) == doctest::Approx(1.0));
}

TEST_CASE("noiseless unperturbed run tracks the truth closely") {
  sim::MonteCarloConfig config;
  config.n_runs = 1;
  config.duration_s = 30.0;
  config.schedule = zero_noise_schedule();
  config.init = sim::InitialPerturbation{0.0, 0.0, 0.0, 0.0};

  for (const auto kind : {sim::FilterKind::inekf, sim::FilterKind::mekf}) {
    const auto runs =
        sim::run_monte_carlo(config, kind, sim::MeasurementMode::partial_30hz);
    REQUIRE(runs.size() == 1);
    const auto& m = runs[0];
    CHECK(!m.diverged);
    CHECK(m.skipped_updates == 0);
    CHECK(m.mean_roll < 2e-3);
    CHECK(m.mean_pitch < 2e-3);
    CHECK(m.mean_yaw < 2e-3);
    CHECK(m.mean_xy < 0.05);
    CHECK(m.mean_vel < 0.02);
  }
}

TEST_CASE("monte carlo results are reproducible and thread-independent") {
  sim::MonteCarloConfig config;
  config.n_runs = 4;
  config.duration_s = 5.0;
  config.seed = 7u;

  const auto a =
      sim::run_monte_carlo(config, sim::FilterKind::inekf, sim::MeasurementMode::partial_30hz);
  const auto b =
      sim::run_monte_carlo(config, sim::FilterKind::inekf, sim::MeasurementMode::partial_30hz);
  config.n_threads = 2;
  const auto c =
      sim::run_monte_carlo(config, sim::FilterKind::inekf, sim::MeasurementMode::partial_30hz);

  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].run_index == static_cast<int>(i));
    REQUIRE(a[i].mean_roll == b[i].mean_roll);
    REQUIRE(a[i].mean_xy == b[i].mean_xy);
    REQUIRE(a[i].mean_roll == c[i].mean_roll);
    REQUIRE(a[i].mean_xy == c[i].mean_xy);
    REQUIRE(a[i].roll_err == c[i].roll_err);
    REQUIRE(a[i].xy_err == c[i].xy_err);
  }

  // Different seeds give different realizations.
  config.n_threads = 1;
  config.seed = 8u;
  const auto d =
      sim::run_monte_carlo(config, sim::FilterKind::inekf, sim::MeasurementMode::partial_30hz);
  CHECK(d[0].mean_xy != a[0].mean_xy);
}

TEST_CASE("NEES is recorded for the invariant filter only") {
  sim::MonteCarloConfig config;
  config.n_runs = 2;
  config.duration_s = 5.0;
  const auto inv =
      sim::run_monte_carlo(config, sim::FilterKind::inekf, sim::MeasurementMode::partial_30hz);
  for (const auto& m : inv) {
    REQUIRE(!m.nees.empty());
    for (const double x : m.nees) REQUIRE(x >= 0.0);
    CHECK(std::isfinite(m.mean_nees));
  }
  const auto mek =
      sim::run_monte_carlo(config, sim::FilterKind::mekf, sim::MeasurementMode::partial_30hz);
  for (const auto& m : mek) CHECK(m.nees.empty());
}

TEST_CASE("a wild position fix trips the divergence flag without throwing") {
  const auto truth = sim::generate_trajectory(2.0, 0.01, {});
  const auto stream = sim::simulate_sensors(truth, zero_noise_schedule(), 1u);

  // Fire while the covariance is still nearly diagonal so the update is a
  // clean position jump beyond the divergence radius.
  sim::Event bomb;
  bomb.k = 1;
  bomb.kind = sim::EventKind::gps;
  bomb.gps.xyz = Vec3(2e3, 0.0, 0.0);
  bomb.gps.sigma_xy = 1e-6;
  bomb.gps.sigma_z = 1e-6;
  bomb.gps.t = 0.01;

  sim::RunOptions opt;
  const auto res = sim::run_filter(sim::FilterKind::inekf, truth.front().pose,
                                   Mat9::Identity(), stream.imu, {bomb}, &truth, opt);
  CHECK(res.metrics.diverged);
  CHECK(res.metrics.xy_err.size() < truth.size());  // run stops at divergence
  CHECK(res.metrics.xy_err.back() > opt.divergence_xy_m);
}

TEST_CASE("summarize matches a sort-based oracle") {
  std::mt19937_64 rng(17u);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<sim::RunMetrics> runs(11);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    runs[i].mean_roll = u(rng);
    runs[i].mean_pitch = u(rng);
    runs[i].mean_yaw = u(rng);
    runs[i].mean_z = u(rng);
    runs[i].mean_vel = u(rng);
    runs[i].mean_xy = u(rng);
    runs[i].diverged = (i % 5 == 4);
  }
  const auto s = sim::summarize(runs);
  CHECK(s.n_runs == 11);
  CHECK(s.diverged_count == 2);

  std::vector<double> xs;
  for (const auto& r : runs) {
    if (!r.diverged) xs.push_back(r.mean_xy);
  }
  std::sort(xs.begin(), xs.end());
  const auto oracle = [&](double p) {
    const double h = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    return xs[lo] + frac * (xs[std::min(lo + 1, xs.size() - 1)] - xs[lo]);
  };
  CHECK(s.xy.median == doctest::Approx(oracle(0.5)).epsilon(1e-12));
  CHECK(s.xy.q1 == doctest::Approx(oracle(0.25)).epsilon(1e-12));
  CHECK(s.xy.q3 == doctest::Approx(oracle(0.75)).epsilon(1e-12));
  double mean = 0.0;
  for (const double x : xs) mean += x;
  CHECK(s.xy.mean == doctest::Approx(mean / xs.size()).epsilon(1e-12));

  // All-diverged batches report NaN statistics but a full divergence count.
  for (auto& r : runs) r.diverged = true;
  const auto all = sim::summarize(runs);
  CHECK(all.diverged_count == 11);
  CHECK(std::isnan(all.xy.mean));
  CHECK_THROWS_AS(sim::summarize({}), std::invalid_argument);
}
