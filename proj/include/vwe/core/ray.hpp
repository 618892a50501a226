#pragma once

#include <Eigen/Dense>

#include "vwe/common.hpp"

namespace vwe {

// Spatial ray of one event: origin and unit direction in a reference frame.
struct BearingRay {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
  double t = 0.0;
};

// Perpendicular distance from a point to the infinite line of the ray.
// Algebraically this is ||(I - f f^T / f^T f) (R^T (v - t))|| evaluated in
// the reference frame; the projected-residual form below is the same number
// without the cancellation near the line.
inline double object_space_distance(const BearingRay& ray,
                                    const Eigen::Vector3d& v) {
  const Eigen::Vector3d w = v - ray.origin;
  const Eigen::Vector3d perp = w - ray.direction * ray.direction.dot(w);
  return perp.norm();
}

}  // namespace vwe
