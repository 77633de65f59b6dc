#pragma once

#include <functional>

#include "asvnav/inekf.hpp"
#include "asvnav/lie.hpp"

namespace asvnav::measurements {

// Roll/pitch pair extracted from a planar reference (e.g. the horizon),
// radians. Valid only in the semi-planar regime |phi|, |theta| < pi/2.
struct RollPitchReading {
  double phi = 0.0;
  double theta = 0.0;
  double sigma_phi = 0.0;
  double sigma_theta = 0.0;
  double t = 0.0;
};

// Absolute heading about world z, psi in (-pi, pi].
struct HeadingReading {
  double psi = 0.0;
  double sigma_psi = 0.0;
  double t = 0.0;
};

// GNSS position fix with horizontal/vertical accuracy split.
struct GpsReading {
  Vec3 xyz = Vec3::Zero();
  double sigma_xy = 0.0;
  double sigma_z = 0.0;
  double t = 0.0;
};

// A measurement paired with its prediction rule: the update needs z_hat
// evaluated at the current belief, so constructors return the measurement
// plus the function producing z_hat and the measurement Jacobian.
struct OrientationUpdate {
  inekf::OrientationMeasurement meas;
  std::function<lie::Rotation(const lie::ExtendedPose&)> predict_z_hat;
  Mat39 h = Mat39::Zero();
};

struct PositionUpdate {
  Vec3 y = Vec3::Zero();
  Mat3 m_pos = Mat3::Zero();
};

// Jacobian shared by every orientation measurement: the innovation reads the
// rotation block of the left error directly.
Mat39 orientation_jacobian();

// Full orientation: z = r_meas, z_hat = belief rotation. m must be diagonal
// (axis variances); off-diagonal structure is rejected rather than dropped.
OrientationUpdate make_full_orientation(const lie::Rotation& r_meas, const Mat3& m);

// Roll/pitch only: z = rot_y(theta)*rot_x(phi), z_hat = planar projection of
// the belief; yaw axis carries infinite variance.
OrientationUpdate make_roll_pitch(const RollPitchReading& reading);

// Heading only: z = rot_z(psi), z_hat = rot_z(yaw of belief); roll and pitch
// axes carry infinite variance. The update throws through yaw_of when the
// belief is at gimbal lock.
OrientationUpdate make_heading(const HeadingReading& reading);

// Full orientation reconstructed from a roll/pitch reading and a heading
// reading taken close in time: z = rot_z(psi)*rot_y(theta)*rot_x(phi) with
// per-axis variances from the two sources.
OrientationUpdate make_reconstructed(const RollPitchReading& rp,
                                     const HeadingReading& heading);

// Position pseudo-measurement from a GNSS fix.
PositionUpdate make_gps(const GpsReading& reading);

// Convenience: evaluate z_hat at the belief and run the filter update.
inekf::UpdateResult apply(const inekf::FilterState& state,
                          const OrientationUpdate& update, double gate_rad = 3.0);
inekf::UpdateResult apply(const inekf::FilterState& state,
                          const PositionUpdate& update);

}  // namespace asvnav::measurements
