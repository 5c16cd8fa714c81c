#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/LU>

#include "pgvo/error.hpp"

namespace pgvo {

using Vec3 = Eigen::Vector3d;

/// Pinhole intrinsics. Image coordinates are continuous: pixel (u, v) covers
/// [u, u+1) x [v, v+1), so its center is (u + 0.5, v + 0.5). The camera frame
/// is x right, y down, z along the optical axis.
struct CameraIntrinsics {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  int width = 0;
  int height = 0;

  double fx() const { return K(0, 0); }
  double fy() const { return K(1, 1); }
  double cx() const { return K(0, 2); }
  double cy() const { return K(1, 2); }

  /// K^-1 (u, v, 1): the ray through image point (u, v) scaled to unit depth.
  Vec3 ray(double u, double v) const {
    return {(u - cx()) / fx(), (v - cy()) / fy(), 1.0};
  }

  /// Image point of a camera-frame point with z > 0.
  Eigen::Vector2d project(const Vec3& p) const {
    return {fx() * p.x() / p.z() + cx(), fy() * p.y() / p.z() + cy()};
  }

  bool contains(const Eigen::Vector2d& uv) const {
    return uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() < width && uv.y() < height;
  }
};

inline CameraIntrinsics make_intrinsics(double fx, double fy, double cx, double cy, int width,
                                        int height) {
  if (!(fx > 0.0) || !(fy > 0.0)) throw UsageError("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw UsageError("image size must be positive");
  CameraIntrinsics cam;
  cam.K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  cam.width = width;
  cam.height = height;
  return cam;
}

/// Square-pixel intrinsics from a horizontal field of view in degrees.
inline CameraIntrinsics intrinsics_from_fov(double hfov_deg, int width, int height) {
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) throw UsageError("hfov must be in (0, 180) degrees");
  const double half = hfov_deg * std::numbers::pi / 360.0;
  const double f = (width / 2.0) / std::tan(half);
  return make_intrinsics(f, f, width / 2.0, height / 2.0, width, height);
}

}  // namespace pgvo
