#include "asvnav/lie.hpp"

#include <cmath>

namespace asvnav::lie {

namespace {
// Below this angle exp/log/Jacobians switch to Taylor series.
constexpr double kSmallAngle = 1e-5;
// Angles within this of pi are rejected by the logarithm as branch-ambiguous.
constexpr double kPiReject = 1e-9;
}  // namespace

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

Vec3 unskew(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  Rotation r(m);
  if (!r.is_valid(tol)) {
    throw std::invalid_argument("Rotation::from_matrix: not orthonormal with det +1");
  }
  return r;
}

bool Rotation::is_valid(double tol) const {
  return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(m_.determinant() - 1.0) <= tol;
}

Rotation rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return Rotation(m);
}

Rotation rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return Rotation(m);
}

Rotation rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return Rotation(m);
}

Rotation so3_exp(const Vec3& w) {
  const double angle = w.norm();
  const Mat3 wx = skew(w);
  double a, b;  // R = I + a*wx + b*wx^2
  if (angle < kSmallAngle) {
    const double t2 = angle * angle;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / (angle * angle);
  }
  return Rotation(Mat3::Identity() + a * wx + b * wx * wx);
}

Vec3 so3_log(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double cos_angle = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  const Vec3 half_skew = unskew(0.5 * (m - m.transpose()));  // sin(angle) * axis

  if (angle < kSmallAngle) {
    // half_skew = sin(angle)*axis; scale by angle/sin(angle) ~ 1 + angle^2/6.
    return half_skew * (1.0 + half_skew.squaredNorm() / 6.0);
  }
  if (M_PI - angle < kPiReject) {
    throw LogBranchError("so3_log: rotation angle at pi, branch ambiguous");
  }
  if (angle > M_PI - 1e-3) {
    // Near pi the skew part loses precision; recover the axis from the
    // symmetric part: (m + m^T)/2 = cos*I + (1-cos)*u*u^T.
    const Mat3 uut = (0.5 * (m + m.transpose()) - cos_angle * Mat3::Identity()) /
                     (1.0 - cos_angle);
    int k;
    uut.diagonal().maxCoeff(&k);
    Vec3 u;
    u[k] = std::sqrt(std::max(uut(k, k), 0.0));
    for (int i = 0; i < 3; ++i) {
      if (i != k) u[i] = uut(k, i) / u[k];
    }
    u.normalize();
    if (u.dot(half_skew) < 0.0) u = -u;
    return angle * u;
  }
  return half_skew * (angle / std::sin(angle));
}

Mat3 so3_left_jacobian(const Vec3& w) {
  const double angle = w.norm();
  const Mat3 wx = skew(w);
  double a, b;  // J = I + a*wx + b*wx^2
  if (angle < kSmallAngle) {
    const double t2 = angle * angle;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    const double t2 = angle * angle;
    a = (1.0 - std::cos(angle)) / t2;
    b = (angle - std::sin(angle)) / (t2 * angle);
  }
  return Mat3::Identity() + a * wx + b * wx * wx;
}

Mat3 so3_left_jacobian_inverse(const Vec3& w) {
  const double angle = w.norm();
  const Mat3 wx = skew(w);
  double c;  // Jinv = I - wx/2 + c*wx^2
  if (angle < kSmallAngle) {
    c = 1.0 / 12.0 + angle * angle / 720.0;
  } else {
    // 1/t^2 - (1+cos)/(2 t sin) computed via cot(t/2) for stability near pi.
    c = 1.0 / (angle * angle) - 1.0 / (2.0 * angle * std::tan(0.5 * angle));
  }
  return Mat3::Identity() - 0.5 * wx + c * wx * wx;
}

double yaw_of(const Rotation& r) {
  const Mat3& m = r.matrix();
  if (std::hypot(m(0, 0), m(1, 0)) < 1e-9) {
    throw DegenerateOrientationError("yaw_of: heading undefined at pitch +-pi/2");
  }
  double psi = std::atan2(m(1, 0), m(0, 0));
  if (psi <= -M_PI) psi = M_PI;
  return psi;
}

Rotation roll_pitch_projection(const Rotation& r) {
  return rot_z(yaw_of(r)).transposed() * r;
}

Vec3 euler_zyx(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double roll = std::atan2(m(2, 1), m(2, 2));
  const double pitch = std::asin(std::clamp(-m(2, 0), -1.0, 1.0));
  const double yaw = std::atan2(m(1, 0), m(0, 0));
  return Vec3(roll, pitch, yaw);
}

Rotation from_euler_zyx(double roll, double pitch, double yaw) {
  return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

Mat5 ExtendedPose::matrix() const {
  Mat5 m = Mat5::Identity();
  m.topLeftCorner<3, 3>() = r.matrix();
  m.block<3, 1>(0, 3) = v;
  m.block<3, 1>(0, 4) = p;
  return m;
}

ExtendedPose ExtendedPose::inverse() const {
  const Rotation rt = r.transposed();
  return {rt, -(rt * v), -(rt * p)};
}

ExtendedPose ExtendedPose::operator*(const ExtendedPose& o) const {
  return {r * o.r, v + r * o.v, p + r * o.p};
}

Mat5 hat9(const Vec9& xi) {
  Mat5 m = Mat5::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.head<3>());
  m.block<3, 1>(0, 3) = xi.segment<3>(3);
  m.block<3, 1>(0, 4) = xi.tail<3>();
  return m;
}

Vec9 vee9(const Mat5& m) {
  Vec9 xi;
  xi.head<3>() = unskew(m.topLeftCorner<3, 3>());
  xi.segment<3>(3) = m.block<3, 1>(0, 3);
  xi.tail<3>() = m.block<3, 1>(0, 4);
  return xi;
}

ExtendedPose se23_exp(const Vec9& xi) {
  const Vec3 w = xi.head<3>();
  const Mat3 j = so3_left_jacobian(w);
  return {so3_exp(w), j * xi.segment<3>(3), j * xi.tail<3>()};
}

Vec9 se23_log(const ExtendedPose& x) {
  const Vec3 w = so3_log(x.r);
  const Mat3 jinv = so3_left_jacobian_inverse(w);
  Vec9 xi;
  xi.head<3>() = w;
  xi.segment<3>(3) = jinv * x.v;
  xi.tail<3>() = jinv * x.p;
  return xi;
}

Mat9 adjoint(const ExtendedPose& x) {
  const Mat3& m = x.r.matrix();
  Mat9 ad = Mat9::Zero();
  ad.block<3, 3>(0, 0) = m;
  ad.block<3, 3>(3, 0) = skew(x.v) * m;
  ad.block<3, 3>(3, 3) = m;
  ad.block<3, 3>(6, 0) = skew(x.p) * m;
  ad.block<3, 3>(6, 6) = m;
  return ad;
}

Rotation rotation_of(const ExtendedPose& x) { return x.r; }

Mat9 expm9(const Mat9& a) {
  // Scale until the norm is small, sum the Taylor series, square back up.
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Mat9 b = a * scale;
  Mat9 term = Mat9::Identity();
  Mat9 sum = Mat9::Identity();
  for (int k = 1; k <= 24; ++k) {
    term = Mat9(term * b) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) sum = Mat9(sum * sum);
  return sum;
}

}  // namespace asvnav::lie
