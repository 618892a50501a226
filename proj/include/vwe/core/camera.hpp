#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "vwe/common.hpp"

namespace vwe {

// Pinhole camera with radial-tangential distortion (k1, k2, p1, p2, k3).
// Undistortion runs a fixed-point iteration (at most 20 rounds, tolerance
// 1e-10 px), which is exact enough for the project/unproject round trip to
// hold to well below 1e-6 px on calibrations in the usual range.
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  std::array<double, 5> distortion{0.0, 0.0, 0.0, 0.0, 0.0};

  bool has_distortion() const {
    for (double d : distortion)
      if (d != 0.0) return true;
    return false;
  }

  // Applies the distortion polynomial to normalized coordinates.
  Eigen::Vector2d distort(const Eigen::Vector2d& n) const {
    const double k1 = distortion[0], k2 = distortion[1];
    const double p1 = distortion[2], p2 = distortion[3];
    const double k3 = distortion[4];
    const double x = n.x(), y = n.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
    const double xy2 = 2.0 * x * y;
    return {x * radial + p1 * xy2 + p2 * (r2 + 2.0 * x * x),
            y * radial + p1 * (r2 + 2.0 * y * y) + p2 * xy2};
  }

  // Inverse of distort() by fixed-point iteration.
  Eigen::Vector2d undistort(const Eigen::Vector2d& d) const {
    if (!has_distortion()) return d;
    const double k1 = distortion[0], k2 = distortion[1];
    const double p1 = distortion[2], p2 = distortion[3];
    const double k3 = distortion[4];
    Eigen::Vector2d u = d;
    const double tol = 1e-10 / std::max(fx, fy);
    for (int it = 0; it < 20; ++it) {
      const double x = u.x(), y = u.y();
      const double r2 = x * x + y * y;
      const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
      const double xy2 = 2.0 * x * y;
      const Eigen::Vector2d tang{p1 * xy2 + p2 * (r2 + 2.0 * x * x),
                                 p1 * (r2 + 2.0 * y * y) + p2 * xy2};
      Eigen::Vector2d next = (d - tang) / radial;
      const double step = (next - u).norm();
      u = next;
      if (step < tol) break;
    }
    return u;
  }
};

// Camera-frame point to pixel. The point must be in front of the camera.
inline Eigen::Vector2d project(const CameraModel& camera,
                               const Eigen::Vector3d& point) {
  if (!(point.z() > 0.0))
    throw DomainError("project: point has non-positive depth");
  Eigen::Vector2d n{point.x() / point.z(), point.y() / point.z()};
  if (camera.has_distortion()) n = camera.distort(n);
  return {camera.fx * n.x() + camera.cx, camera.fy * n.y() + camera.cy};
}

// Pixel to unit bearing in the camera frame (positive z component).
inline Eigen::Vector3d unproject(const CameraModel& camera,
                                 const Eigen::Vector2d& pixel) {
  Eigen::Vector2d n{(pixel.x() - camera.cx) / camera.fx,
                    (pixel.y() - camera.cy) / camera.fy};
  if (camera.has_distortion()) n = camera.undistort(n);
  Eigen::Vector3d f{n.x(), n.y(), 1.0};
  return f.normalized();
}

inline bool in_bounds(const CameraModel& camera, const Eigen::Vector2d& px,
                      double margin = 0.0) {
  return px.x() >= margin && px.x() <= camera.width - 1.0 - margin &&
         px.y() >= margin && px.y() <= camera.height - 1.0 - margin;
}

}  // namespace vwe
