#pragma once

#include <Eigen/Geometry>

#include "asvnav/inekf.hpp"
#include "asvnav/measurements.hpp"

namespace asvnav::mekf {

// Baseline multiplicative EKF over the same state as the invariant filter.
// Quaternion convention: Hamilton, body-to-world. Error state mirrors
// Tangent9 ordering: [attitude (body frame), velocity, position], so the two
// filters' covariances and errors compare directly.
struct MekfState {
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  Mat9 cov = Mat9::Identity();
  double t = 0.0;
};

struct MekfUpdateResult {
  MekfState state;
  bool applied = true;
};

// Strapdown propagation with the same kinematics and gravity as the invariant
// filter; the error-state Jacobian is linearized about the current attitude
// estimate, so propagation quality degrades with estimate error.
MekfState mekf_predict(const MekfState& state, const inekf::ImuSample& imu,
                       double dt, const inekf::ProcessNoise& noise);

// Roll/pitch measurement through the Euler decomposition of the estimated
// attitude. Skipped (applied = false) near gimbal lock, where the Euler
// Jacobian blows up.
MekfUpdateResult mekf_update_rollpitch(const MekfState& state,
                                       const measurements::RollPitchReading& r);

// Scalar heading update through the Euler yaw of the estimated attitude.
MekfUpdateResult mekf_update_heading(const MekfState& state,
                                     const measurements::HeadingReading& r);

// Linear position update.
MekfUpdateResult mekf_update_gps(const MekfState& state,
                                 const measurements::GpsReading& r);

// Mean as an extended pose, for shared metrics with the invariant filter.
lie::ExtendedPose mean_pose(const MekfState& state);

}  // namespace asvnav::mekf
