#include "asvnav/mekf.hpp"

#include <cmath>
#include <stdexcept>

namespace asvnav::mekf {

namespace {

constexpr double kMaxDt = 0.1;
constexpr double kGimbalCos = 1e-6;

Mat9 symmetrized(const Mat9& m) { return 0.5 * (m + m.transpose()); }

Eigen::Quaterniond quat_exp(const Vec3& w) {
  const double angle = w.norm();
  const double half = 0.5 * angle;
  // k = sin(angle/2) / angle, series below the precision floor of sin.
  const double k =
      (angle < 1e-8) ? 0.5 - angle * angle / 48.0 : std::sin(half) / angle;
  return Eigen::Quaterniond(std::cos(half), k * w.x(), k * w.y(), k * w.z());
}

double wrap_pi(double a) {
  const double r = std::remainder(a, 2.0 * M_PI);
  return (r <= -M_PI) ? M_PI : r;
}

// Kalman step for a k-dimensional linear(ized) measurement; injects the
// attitude correction multiplicatively and renormalizes.
template <int K>
MekfState corrected(const MekfState& state,
                    const Eigen::Matrix<double, K, 9>& h,
                    const Eigen::Matrix<double, K, 1>& innovation,
                    const Eigen::Matrix<double, K, K>& r_meas) {
  const Eigen::Matrix<double, K, K> s =
      h * state.cov * h.transpose() + r_meas;
  const Eigen::Matrix<double, 9, K> k_gain =
      state.cov * h.transpose() * s.inverse();
  const Vec9 delta = k_gain * innovation;

  MekfState out = state;
  out.q = (state.q * quat_exp(delta.head<3>())).normalized();
  out.v += delta.segment<3>(3);
  out.p += delta.tail<3>();
  out.cov = symmetrized((Mat9::Identity() - k_gain * h) * state.cov);
  return out;
}

// Rates-to-Euler-rates rows for the z-y-x convention; the measurement
// Jacobians of roll, pitch, and yaw with respect to a body-frame attitude
// perturbation.
Mat3 euler_rate_matrix(double phi, double theta) {
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double tt = std::tan(theta), ct = std::cos(theta);
  Mat3 e;
  e << 1.0, sp * tt, cp * tt,
       0.0, cp, -sp,
       0.0, sp / ct, cp / ct;
  return e;
}

}  // namespace

MekfState mekf_predict(const MekfState& state, const inekf::ImuSample& imu,
                       double dt, const inekf::ProcessNoise& noise) {
  if (!(dt > 0.0) || dt > kMaxDt) {
    throw std::invalid_argument("mekf_predict: dt outside (0, 0.1]");
  }
  if (!imu.gyro.allFinite() || !imu.accel.allFinite()) {
    throw std::invalid_argument("mekf_predict: non-finite IMU sample");
  }

  const Mat3 rm = state.q.toRotationMatrix();
  const Vec3 accel_world = rm * imu.accel + inekf::gravity();

  MekfState out = state;
  out.q = (state.q * quat_exp(imu.gyro * dt)).normalized();
  out.v = state.v + accel_world * dt;
  out.p = state.p + state.v * dt + 0.5 * accel_world * dt * dt;
  out.t = state.t + dt;

  Mat9 a = Mat9::Zero();
  a.block<3, 3>(0, 0) = -lie::skew(imu.gyro);
  a.block<3, 3>(3, 0) = -rm * lie::skew(imu.accel);
  a.block<3, 3>(6, 3) = Mat3::Identity();
  const Mat9 phi = lie::expm9(a * dt);
  out.cov = symmetrized(phi * (state.cov + noise.q * dt) * phi.transpose());
  return out;
}

MekfUpdateResult mekf_update_rollpitch(const MekfState& state,
                                       const measurements::RollPitchReading& r) {
  if (!(r.sigma_phi > 0.0) || !(r.sigma_theta > 0.0)) {
    throw std::invalid_argument("mekf roll/pitch: stds must be positive");
  }
  const Mat3 rm = state.q.toRotationMatrix();
  const double sin_theta = std::clamp(-rm(2, 0), -1.0, 1.0);
  const double cos_theta = std::sqrt(1.0 - sin_theta * sin_theta);
  if (cos_theta < kGimbalCos) return {state, false};

  const Vec3 euler = lie::euler_zyx(lie::Rotation(rm));
  const Mat3 e = euler_rate_matrix(euler[0], euler[1]);

  Eigen::Matrix<double, 2, 9> h = Eigen::Matrix<double, 2, 9>::Zero();
  h.block<1, 3>(0, 0) = e.row(0);
  h.block<1, 3>(1, 0) = e.row(1);
  Eigen::Vector2d innovation(wrap_pi(r.phi - euler[0]),
                             wrap_pi(r.theta - euler[1]));
  Eigen::Matrix2d r_meas = Eigen::Matrix2d::Zero();
  r_meas(0, 0) = r.sigma_phi * r.sigma_phi;
  r_meas(1, 1) = r.sigma_theta * r.sigma_theta;
  return {corrected<2>(state, h, innovation, r_meas), true};
}

MekfUpdateResult mekf_update_heading(const MekfState& state,
                                     const measurements::HeadingReading& r) {
  if (!(r.sigma_psi > 0.0)) {
    throw std::invalid_argument("mekf heading: std must be positive");
  }
  const Mat3 rm = state.q.toRotationMatrix();
  const double sin_theta = std::clamp(-rm(2, 0), -1.0, 1.0);
  const double cos_theta = std::sqrt(1.0 - sin_theta * sin_theta);
  if (cos_theta < kGimbalCos) return {state, false};

  const Vec3 euler = lie::euler_zyx(lie::Rotation(rm));
  const Mat3 e = euler_rate_matrix(euler[0], euler[1]);

  Eigen::Matrix<double, 1, 9> h = Eigen::Matrix<double, 1, 9>::Zero();
  h.block<1, 3>(0, 0) = e.row(2);
  Eigen::Matrix<double, 1, 1> innovation(wrap_pi(r.psi - euler[2]));
  Eigen::Matrix<double, 1, 1> r_meas(r.sigma_psi * r.sigma_psi);
  return {corrected<1>(state, h, innovation, r_meas), true};
}

MekfUpdateResult mekf_update_gps(const MekfState& state,
                                 const measurements::GpsReading& r) {
  const auto u = measurements::make_gps(r);
  Eigen::Matrix<double, 3, 9> h = Eigen::Matrix<double, 3, 9>::Zero();
  h.block<3, 3>(0, 6) = Mat3::Identity();
  const Vec3 innovation = u.y - state.p;
  return {corrected<3>(state, h, innovation, u.m_pos), true};
}

lie::ExtendedPose mean_pose(const MekfState& state) {
  lie::ExtendedPose x;
  x.r = lie::Rotation(state.q.normalized().toRotationMatrix());
  x.v = state.v;
  x.p = state.p;
  return x;
}

}  // namespace asvnav::mekf
