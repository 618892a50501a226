#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <vector>

#include "vwe/common.hpp"

namespace vwe {

// Frame conventions used throughout:
//   world   : z up.
//   vehicle : y = heading, z up, x = heading rotated -90 deg about z.
//   camera  : z = optical axis, x = image u (right), y = image v (down).
// A RigidTransform (R, t) is the pose of a body in its parent frame:
// p_parent = R * p_body + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
};

inline RigidTransform compose(const RigidTransform& a,
                              const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline RigidTransform inverse(const RigidTransform& a) {
  RigidTransform out;
  out.rotation = a.rotation.transpose();
  out.translation = -(out.rotation * a.translation);
  return out;
}

// Re-projects a near-orthonormal matrix onto SO(3) through the unit
// quaternion. Long compose chains call this to shed accumulated drift.
inline RigidTransform orthonormalized(const RigidTransform& a) {
  Eigen::Quaterniond q(a.rotation);
  q.normalize();
  return {q.toRotationMatrix(), a.translation};
}

inline double orthonormality_error(const Eigen::Matrix3d& r) {
  double drift = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  return std::max(drift, std::abs(r.determinant() - 1.0));
}

// Rotation that turns the heading (+y) toward +x by `angle` radians.
// yaw_about_z(a) * [0,1,0] = [sin a, cos a, 0].
inline Eigen::Matrix3d yaw_about_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d r;
  r << c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

// Rotation angle in radians, in [0, pi].
inline double rotation_angle(const Eigen::Matrix3d& r) {
  double c = (r.trace() - 1.0) * 0.5;
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

struct PoseSample {
  double t = 0.0;
  RigidTransform pose;  // vehicle-to-world
};

}  // namespace vwe
