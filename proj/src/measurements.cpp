#include "asvnav/measurements.hpp"

#include <cmath>
#include <stdexcept>

namespace asvnav::measurements {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

lie::Rotation belief_rotation(const lie::ExtendedPose& x) { return x.r; }

}  // namespace

Mat39 orientation_jacobian() {
  Mat39 h = Mat39::Zero();
  h.block<3, 3>(0, 0) = Mat3::Identity();
  return h;
}

OrientationUpdate make_full_orientation(const lie::Rotation& r_meas,
                                        const Mat3& m) {
  require(m.allFinite(), "full orientation: non-finite covariance");
  Mat3 off = m;
  off.diagonal().setZero();
  require(off.cwiseAbs().maxCoeff() == 0.0,
          "full orientation: covariance must be diagonal");
  OrientationUpdate u;
  u.meas.z = r_meas;
  u.meas.var = m.diagonal();
  u.meas.inf_mask = {false, false, false};
  inekf::validate(u.meas);
  u.predict_z_hat = belief_rotation;
  u.h = orientation_jacobian();
  return u;
}

OrientationUpdate make_roll_pitch(const RollPitchReading& reading) {
  require(std::isfinite(reading.phi) && std::isfinite(reading.theta),
          "roll/pitch: non-finite angles");
  require(std::abs(reading.phi) < M_PI / 2 && std::abs(reading.theta) < M_PI / 2,
          "roll/pitch: angles outside the semi-planar regime");
  require(reading.sigma_phi > 0 && reading.sigma_theta > 0,
          "roll/pitch: stds must be positive");
  OrientationUpdate u;
  u.meas.z = lie::rot_y(reading.theta) * lie::rot_x(reading.phi);
  u.meas.var =
      Vec3(reading.sigma_phi * reading.sigma_phi,
           reading.sigma_theta * reading.sigma_theta, std::nan(""));
  u.meas.inf_mask = {false, false, true};
  u.predict_z_hat = [](const lie::ExtendedPose& x) {
    return lie::roll_pitch_projection(x.r);
  };
  u.h = orientation_jacobian();
  return u;
}

OrientationUpdate make_heading(const HeadingReading& reading) {
  require(std::isfinite(reading.psi) && reading.psi > -M_PI &&
              reading.psi <= M_PI,
          "heading: psi outside (-pi, pi]");
  require(reading.sigma_psi > 0, "heading: std must be positive");
  OrientationUpdate u;
  u.meas.z = lie::rot_z(reading.psi);
  u.meas.var = Vec3(std::nan(""), std::nan(""),
                    reading.sigma_psi * reading.sigma_psi);
  u.meas.inf_mask = {true, true, false};
  u.predict_z_hat = [](const lie::ExtendedPose& x) {
    return lie::rot_z(lie::yaw_of(x.r));
  };
  u.h = orientation_jacobian();
  return u;
}

OrientationUpdate make_reconstructed(const RollPitchReading& rp,
                                     const HeadingReading& heading) {
  require(std::abs(rp.phi) < M_PI / 2 && std::abs(rp.theta) < M_PI / 2,
          "reconstructed orientation: roll/pitch outside the semi-planar regime");
  require(rp.sigma_phi > 0 && rp.sigma_theta > 0 && heading.sigma_psi > 0,
          "reconstructed orientation: stds must be positive");
  const lie::Rotation z =
      lie::rot_z(heading.psi) * lie::rot_y(rp.theta) * lie::rot_x(rp.phi);
  Mat3 m = Mat3::Zero();
  m.diagonal() << rp.sigma_phi * rp.sigma_phi, rp.sigma_theta * rp.sigma_theta,
      heading.sigma_psi * heading.sigma_psi;
  return make_full_orientation(z, m);
}

PositionUpdate make_gps(const GpsReading& reading) {
  require(reading.xyz.allFinite(), "gps: non-finite position");
  require(reading.sigma_xy > 0 && reading.sigma_z > 0,
          "gps: stds must be positive");
  PositionUpdate u;
  u.y = reading.xyz;
  u.m_pos = Vec3(reading.sigma_xy * reading.sigma_xy,
                 reading.sigma_xy * reading.sigma_xy,
                 reading.sigma_z * reading.sigma_z)
                .asDiagonal();
  return u;
}

inekf::UpdateResult apply(const inekf::FilterState& state,
                          const OrientationUpdate& update, double gate_rad) {
  return inekf::update_orientation(state, update.meas,
                                   update.predict_z_hat(state.x_hat), update.h,
                                   gate_rad);
}

inekf::UpdateResult apply(const inekf::FilterState& state,
                          const PositionUpdate& update) {
  return inekf::update_position(state, update.y, update.m_pos);
}

}  // namespace asvnav::measurements
