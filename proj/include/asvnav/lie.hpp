#pragma once

#include <Eigen/Dense>
#include <array>

#include "asvnav/errors.hpp"

namespace asvnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat93 = Eigen::Matrix<double, 9, 3>;

/// Tangent coordinates. Ordering is [rotation, velocity, position] throughout.
using Tangent3 = Vec3;
using Tangent9 = Vec9;

namespace lie {

/// so(3) hat: maps w to the skew matrix with skew(w)*v == w.cross(v).
Mat3 skew(const Vec3& w);
/// so(3) vee, inverse of skew.
Vec3 unskew(const Mat3& m);

/// 3D rotation, stored as an orthonormal matrix with det +1.
/// The unchecked constructor trusts the caller; from_matrix validates.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m) : m_(m) {}

  /// Validating factory: throws std::invalid_argument unless m is orthonormal
  /// with determinant +1 within tol.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9);

  const Mat3& matrix() const { return m_; }
  Rotation transposed() const { return Rotation(m_.transpose()); }
  Rotation inverse() const { return transposed(); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  bool is_valid(double tol = 1e-9) const;

 private:
  Mat3 m_;
};

/// Elementary rotations about the x, y, z axes (right-handed, radians).
Rotation rot_x(double angle);
Rotation rot_y(double angle);
Rotation rot_z(double angle);

/// SO(3) exponential map (Rodrigues; Taylor branch below 1e-5 rad).
Rotation so3_exp(const Vec3& w);

/// SO(3) logarithm. Returns w with |w| in [0, pi). Throws LogBranchError when
/// the angle is at pi (within ~1e-9), where the branch is ambiguous.
Vec3 so3_log(const Rotation& r);

/// Left Jacobian of SO(3) and its inverse (Taylor branch below 1e-5 rad).
Mat3 so3_left_jacobian(const Vec3& w);
Mat3 so3_left_jacobian_inverse(const Vec3& w);

/// Heading angle psi = atan2(m10, m00), in (-pi, pi]. Throws
/// DegenerateOrientationError at pitch +-90 deg where yaw is undefined.
double yaw_of(const Rotation& r);

/// Removes the heading component: returns rot_z(yaw_of(r))^T * r, a rotation
/// whose yaw is zero. Idempotent; invariant under left rot_z composition.
Rotation roll_pitch_projection(const Rotation& r);

/// Euler angles (roll, pitch, yaw) of r = rot_z(yaw)*rot_y(pitch)*rot_x(roll).
Vec3 euler_zyx(const Rotation& r);
Rotation from_euler_zyx(double roll, double pitch, double yaw);

/// Element of SE2(3): rotation, velocity, position. Embeds as 5x5
/// [[R, v, p], [0,1,0], [0,0,1]].
struct ExtendedPose {
  Rotation r;
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();

  static ExtendedPose identity() { return {}; }

  Mat5 matrix() const;
  ExtendedPose inverse() const;
  ExtendedPose operator*(const ExtendedPose& o) const;
};

/// se2(3) hat: 9-vector [w, nu_v, nu_p] to 5x5 algebra element.
Mat5 hat9(const Vec9& xi);
Vec9 vee9(const Mat5& m);

/// SE2(3) exponential / logarithm. se23_log throws LogBranchError at rotation
/// angle pi (inherited from so3_log).
ExtendedPose se23_exp(const Vec9& xi);
Vec9 se23_log(const ExtendedPose& x);

/// Adjoint matrix: hat9(adjoint(x) * xi) == x.matrix() * hat9(xi) * x.inverse().matrix().
Mat9 adjoint(const ExtendedPose& x);

/// Rotation component of x. This map is a group homomorphism onto SO(3):
/// it preserves products, identity, and inverses.
Rotation rotation_of(const ExtendedPose& x);

/// General 9x9 matrix exponential via scaling-and-squaring Taylor series,
/// shared by the error-propagation matrices of both filters.
Mat9 expm9(const Mat9& a);

}  // namespace lie
}  // namespace asvnav
