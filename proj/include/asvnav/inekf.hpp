#pragma once

#include <array>

#include "asvnav/lie.hpp"

namespace asvnav::inekf {

/// World frame is z-up; gravity acts along -z.
inline Vec3 gravity() { return Vec3(0.0, 0.0, -9.81); }

/// Body-frame gyro (rad/s) and accelerometer specific force (m/s^2).
struct ImuSample {
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
  double t = 0.0;
};

/// Continuous-time process noise density for the error state
/// [rotation, velocity, position], units (tangent unit)^2 / s.
struct ProcessNoise {
  Mat9 q = Mat9::Zero();

  /// Diagonal density from per-sample sensor noise at a given rate:
  /// density = std^2 / rate. position_walk is a density directly.
  static ProcessNoise from_sensor_stds(double gyro_std, double accel_std,
                                       double rate_hz, double position_walk = 0.0);
};

/// Filter belief: mean on SE2(3) and covariance of the left-error tangent
/// xi (ordering [rotation, velocity, position]), with X = X_hat * exp(-xi^).
struct FilterState {
  lie::ExtendedPose x_hat;
  Mat9 sigma_hat = Mat9::Zero();
  double t = 0.0;
};

/// Orientation measurement with per-axis variances; axes flagged in inf_mask
/// carry unbounded variance and their var slots hold NaN and are never read.
struct OrientationMeasurement {
  lie::Rotation z;
  Vec3 var = Vec3::Zero();
  std::array<bool, 3> inf_mask = {false, false, false};
};

/// Throws std::invalid_argument unless at least one axis is unmasked and all
/// unmasked variances are finite and positive.
void validate(const OrientationMeasurement& meas);

/// Innovation pieces for an orientation update.
struct Innovation {
  Vec3 v_l = Vec3::Zero();      // log(z^-1 * z_hat)
  Mat3 s_inv = Mat3::Zero();    // innovation covariance inverse
  Mat93 k = Mat93::Zero();      // gain
};

struct UpdateResult {
  FilterState state;
  bool applied = true;  // false when the innovation was gated out
};

/// Error-state transition matrix for the left-invariant error over one step.
/// Depends only on the IMU sample and dt, never on the state estimate.
Mat9 state_transition(const ImuSample& imu, double dt);

/// Strapdown propagation of mean and covariance.
/// Mean: R <- R*exp(w dt); v <- v + (R a + g) dt; p <- p + v dt + 0.5 (R a + g) dt^2.
/// Covariance: Phi Sigma Phi^T + Phi Q Phi^T dt.
/// Throws std::invalid_argument for non-finite inputs or dt outside (0, 0.1].
FilterState predict(const FilterState& state, const ImuSample& imu, double dt,
                    const ProcessNoise& noise);

/// Innovation covariance inverse with unbounded variance on masked axes,
/// evaluated in closed form:
///   S^-1 = St^-1 - St^-1 (St (R_hat^T M+ R_hat) + I)^-1,
/// where St = sigma_tilde and M+ holds reciprocal variances with masked
/// axes set to zero. With no masked axis this equals (St + R^T M R)^-1.
/// Throws UnobservableInnovationError when sigma_tilde is numerically singular.
Mat3 innovation_cov_inverse(const Mat3& sigma_tilde, const OrientationMeasurement& meas,
                            const lie::Rotation& r_hat);

/// Gain and innovation for an orientation measurement with prediction z_hat
/// and measurement Jacobian h (3x9, typically [I 0 0]).
Innovation compute_innovation(const FilterState& state,
                              const OrientationMeasurement& meas,
                              const lie::Rotation& z_hat, const Mat39& h);

/// Applies an orientation measurement. Innovations with rotation angle above
/// gate_rad (or at the log branch point pi) are rejected: the returned state
/// is unchanged and applied is false.
UpdateResult update_orientation(const FilterState& state,
                                const OrientationMeasurement& meas,
                                const lie::Rotation& z_hat, const Mat39& h,
                                double gate_rad = 3.0);

/// Applies a world-frame position fix y with noise covariance m_pos as a
/// body-frame pseudo-measurement.
UpdateResult update_position(const FilterState& state, const Vec3& y,
                             const Mat3& m_pos);

}  // namespace asvnav::inekf
