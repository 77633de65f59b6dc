#include "asvnav/inekf.hpp"

#include <cmath>

namespace asvnav::inekf {

namespace {

constexpr double kMaxDt = 0.1;
constexpr double kMaxCondition = 1e12;

Mat9 symmetrized(const Mat9& m) { return 0.5 * (m + m.transpose()); }

FilterState corrected(const FilterState& state, const Vec9& delta, const Mat39& h,
                      const Mat93& k) {
  FilterState out = state;
  out.x_hat = state.x_hat * lie::se23_exp(-delta);
  out.sigma_hat = symmetrized((Mat9::Identity() - k * h) * state.sigma_hat);
  return out;
}

}  // namespace

ProcessNoise ProcessNoise::from_sensor_stds(double gyro_std, double accel_std,
                                            double rate_hz, double position_walk) {
  ProcessNoise n;
  const double qg = gyro_std * gyro_std / rate_hz;
  const double qa = accel_std * accel_std / rate_hz;
  n.q.diagonal() << qg, qg, qg, qa, qa, qa, position_walk, position_walk, position_walk;
  return n;
}

void validate(const OrientationMeasurement& meas) {
  bool any_unmasked = false;
  for (int i = 0; i < 3; ++i) {
    if (meas.inf_mask[i]) continue;
    any_unmasked = true;
    if (!std::isfinite(meas.var[i]) || meas.var[i] <= 0.0) {
      throw std::invalid_argument("OrientationMeasurement: unmasked variance must be finite and positive");
    }
  }
  if (!any_unmasked) {
    throw std::invalid_argument("OrientationMeasurement: all axes masked");
  }
}

Mat9 state_transition(const ImuSample& imu, double dt) {
  const Mat3 wx = lie::skew(imu.gyro);
  Mat9 a = Mat9::Zero();
  a.block<3, 3>(0, 0) = -wx;
  a.block<3, 3>(3, 0) = -lie::skew(imu.accel);
  a.block<3, 3>(3, 3) = -wx;
  a.block<3, 3>(6, 3) = Mat3::Identity();
  a.block<3, 3>(6, 6) = -wx;
  return lie::expm9(a * dt);
}

FilterState predict(const FilterState& state, const ImuSample& imu, double dt,
                    const ProcessNoise& noise) {
  if (!(dt > 0.0) || dt > kMaxDt) {
    throw std::invalid_argument("predict: dt must be in (0, 0.1]");
  }
  if (!imu.gyro.allFinite() || !imu.accel.allFinite()) {
    throw std::invalid_argument("predict: non-finite IMU sample");
  }

  const Vec3 accel_world = state.x_hat.r * imu.accel + gravity();
  FilterState out;
  out.x_hat.r = state.x_hat.r * lie::so3_exp(imu.gyro * dt);
  out.x_hat.v = state.x_hat.v + accel_world * dt;
  out.x_hat.p = state.x_hat.p + state.x_hat.v * dt + 0.5 * dt * dt * accel_world;
  const Mat9 phi = state_transition(imu, dt);
  out.sigma_hat = symmetrized(phi * (state.sigma_hat + noise.q * dt) * phi.transpose());
  out.t = state.t + dt;
  return out;
}

Mat3 innovation_cov_inverse(const Mat3& sigma_tilde, const OrientationMeasurement& meas,
                            const lie::Rotation& r_hat) {
  validate(meas);

  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (sigma_tilde + sigma_tilde.transpose()));
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw UnobservableInnovationError("innovation_cov_inverse: sigma_tilde singular");
  }

  Mat3 m_plus = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    if (!meas.inf_mask[i]) m_plus(i, i) = 1.0 / meas.var[i];
  }
  const Mat3 w = r_hat.matrix().transpose() * m_plus * r_hat.matrix();
  const Mat3 st_inv = sigma_tilde.inverse();
  return st_inv - st_inv * (sigma_tilde * w + Mat3::Identity()).inverse();
}

Innovation compute_innovation(const FilterState& state,
                              const OrientationMeasurement& meas,
                              const lie::Rotation& z_hat, const Mat39& h) {
  Innovation inn;
  inn.v_l = lie::so3_log(meas.z.inverse() * z_hat);
  const Mat3 sigma_tilde = h * state.sigma_hat * h.transpose();
  inn.s_inv = innovation_cov_inverse(sigma_tilde, meas, state.x_hat.r);
  inn.k = state.sigma_hat * h.transpose() * inn.s_inv;
  return inn;
}

UpdateResult update_orientation(const FilterState& state,
                                const OrientationMeasurement& meas,
                                const lie::Rotation& z_hat, const Mat39& h,
                                double gate_rad) {
  validate(meas);

  // Gate on the innovation rotation angle before taking the log; this also
  // covers the branch-ambiguous angle pi.
  const Mat3 rel = (meas.z.inverse() * z_hat).matrix();
  const double angle = std::acos(std::clamp(0.5 * (rel.trace() - 1.0), -1.0, 1.0));
  if (angle > gate_rad || angle > M_PI - 1e-9) {
    return {state, false};
  }

  const Innovation inn = compute_innovation(state, meas, z_hat, h);
  return {corrected(state, inn.k * inn.v_l, h, inn.k), true};
}

UpdateResult update_position(const FilterState& state, const Vec3& y,
                             const Mat3& m_pos) {
  if (!y.allFinite()) {
    throw std::invalid_argument("update_position: non-finite measurement");
  }
  const Mat3 r = state.x_hat.r.matrix();
  Mat39 h = Mat39::Zero();
  h.block<3, 3>(0, 6) = Mat3::Identity();

  const Vec3 delta = r.transpose() * (state.x_hat.p - y);
  const Mat3 s = h * state.sigma_hat * h.transpose() + r.transpose() * m_pos * r;
  const Mat3 s_inv = s.inverse();
  const Mat93 k = state.sigma_hat * h.transpose() * s_inv;
  return {corrected(state, k * delta, h, k), true};
}

}  // namespace asvnav::inekf
