#pragma once

#include <vector>

#include <Eigen/Core>

#include "asvnav/measurements.hpp"

namespace asvnav::horizon {

// Pinhole camera parameters relevant to horizon geometry. Pixel x grows
// rightward, pixel y grows downward.
struct CameraIntrinsics {
  double f_y = 0.0;
  double c_y = 0.0;
  int image_height = 0;
  int image_width = 0;
};

// A detected line segment in pixel coordinates.
struct Segment {
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
  Eigen::Vector2d p1 = Eigen::Vector2d::Zero();
};

// Observer height above the water surface and Earth radius. mount_pitch is
// the camera's nose-up pitch relative to the body frame (0 = aligned).
struct HorizonGeometry {
  double camera_height_v = 0.0;
  double earth_radius_re = 6.371e6;
  double mount_pitch = 0.0;
};

// Drops segments steeper than (90 deg - vertical_cutoff_deg) from horizontal
// and returns the longest survivor; ties go to the shallower segment. Throws
// NoHorizonError when nothing survives.
Segment filter_and_select(const std::vector<Segment>& segments,
                          double vertical_cutoff_deg = 45.0);

// Apparent roll of the segment: endpoints ordered left to right, then
// atan2(dy, dx) in pixel coordinates. A horizon rising to the right in the
// image (dy < 0, pixel y down) gives a negative angle.
double roll_from_segment(const Segment& s);

// Angle of the horizon ray below the optical axis: atan2(p_hy - c_y, f_y).
// Positive when the horizon sits below the principal point.
double declination_from_pixel(double p_hy, const CameraIntrinsics& cam);

// Inclination of the visible horizon: alpha = asin(Re / (Re + V)). The dip
// below the local horizontal is pi/2 - alpha ~ sqrt(2V/Re) for V << Re.
double horizon_inclination(const HorizonGeometry& geom);

// Camera nose-up pitch recovered from the horizon inclination and the camera
// declination angle theta_c: alpha - theta_c - pi/2.
double pitch_from_horizon(double alpha, double theta_c);

// Full pipeline: select a segment, read roll from its slope and pitch from
// its centerline crossing, correcting for horizon dip and mount pitch.
// sigma is the angular std assigned to both axes of the reading.
measurements::RollPitchReading horizon_to_reading(
    const std::vector<Segment>& segments, const CameraIntrinsics& cam,
    const HorizonGeometry& geom, double sigma, double t = 0.0,
    double vertical_cutoff_deg = 45.0);

}  // namespace asvnav::horizon
