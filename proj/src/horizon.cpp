#include "asvnav/horizon.hpp"

#include <cmath>
#include <stdexcept>

#include "asvnav/errors.hpp"

namespace asvnav::horizon {

namespace {

// Absolute angle from image-horizontal in [0, pi/2].
double angle_from_horizontal(const Segment& s) {
  const Eigen::Vector2d d = s.p1 - s.p0;
  return std::atan2(std::abs(d.y()), std::abs(d.x()));
}

}  // namespace

Segment filter_and_select(const std::vector<Segment>& segments,
                          double vertical_cutoff_deg) {
  const double max_angle = (90.0 - vertical_cutoff_deg) * M_PI / 180.0;
  const Segment* best = nullptr;
  double best_len2 = 0.0;
  double best_angle = 0.0;
  for (const Segment& s : segments) {
    const double len2 = (s.p1 - s.p0).squaredNorm();
    if (len2 == 0.0) continue;  // degenerate, nothing to measure
    const double angle = angle_from_horizontal(s);
    if (angle > max_angle) continue;
    if (best == nullptr || len2 > best_len2 ||
        (len2 == best_len2 && angle < best_angle)) {
      best = &s;
      best_len2 = len2;
      best_angle = angle;
    }
  }
  if (best == nullptr) {
    throw NoHorizonError("no segment within the vertical cutoff");
  }
  return *best;
}

double roll_from_segment(const Segment& s) {
  Eigen::Vector2d a = s.p0, b = s.p1;
  if (a == b) throw std::invalid_argument("degenerate segment");
  if (b.x() < a.x() || (b.x() == a.x() && b.y() < a.y())) std::swap(a, b);
  return std::atan2(b.y() - a.y(), b.x() - a.x());
}

double declination_from_pixel(double p_hy, const CameraIntrinsics& cam) {
  if (!std::isfinite(p_hy)) throw std::invalid_argument("non-finite pixel row");
  return std::atan2(p_hy - cam.c_y, cam.f_y);
}

double horizon_inclination(const HorizonGeometry& geom) {
  if (!(geom.camera_height_v > 0.0 &&
        geom.camera_height_v < geom.earth_radius_re)) {
    throw std::invalid_argument("camera height outside (0, earth radius)");
  }
  return std::asin(geom.earth_radius_re /
                   (geom.earth_radius_re + geom.camera_height_v));
}

double pitch_from_horizon(double alpha, double theta_c) {
  return alpha - theta_c - M_PI / 2;
}

measurements::RollPitchReading horizon_to_reading(
    const std::vector<Segment>& segments, const CameraIntrinsics& cam,
    const HorizonGeometry& geom, double sigma, double t,
    double vertical_cutoff_deg) {
  const Segment seg = filter_and_select(segments, vertical_cutoff_deg);
  const double phi = roll_from_segment(seg);

  const Eigen::Vector2d d = seg.p1 - seg.p0;
  if (d.x() == 0.0) {
    throw NoHorizonError("selected segment cannot cross the centerline");
  }
  const double centerline_x = cam.image_width / 2.0;
  const double p_hy = seg.p0.y() + (centerline_x - seg.p0.x()) * d.y() / d.x();

  // The declination is positive for a horizon below the principal point, so
  // the camera's pitch-compensation angle enters with the opposite sign.
  const double theta_c = -declination_from_pixel(p_hy, cam);
  const double alpha = horizon_inclination(geom);
  const double nose_up = pitch_from_horizon(alpha, theta_c) - geom.mount_pitch;

  measurements::RollPitchReading reading;
  reading.phi = phi;
  reading.theta = -nose_up;  // convert to the z-y-x Euler pitch convention
  reading.sigma_phi = sigma;
  reading.sigma_theta = sigma;
  reading.t = t;
  return reading;
}

}  // namespace asvnav::horizon
