#pragma once

#include <cmath>

#include "vwe/core/transform.hpp"

namespace vwe {

// Constant-velocity arc motion of a non-holonomic planar vehicle. Positive
// omega turns the heading (+y) toward +x; the instantaneous centre of
// rotation sits at (v/omega, 0) in the frame at t_ref.
struct AckermannParams {
  double omega = 0.0;  // yaw rate, rad/s
  double v = 1.0;      // forward speed, m/s (fixed by configuration)
  double t_ref = 0.0;  // reference timestamp, s
};

// Pose of the frame at t_k expressed in the frame at t_ref.
// R = yaw(omega*dt), t = (v/omega) * [1 - cos(omega*dt), sin(omega*dt), 0];
// the |omega*dt| < 1e-6 branch uses the second-order series of the same
// expression, which matches the exact branch to ~1e-9 at the switch point.
inline RigidTransform ackermann_relative_pose(const AckermannParams& params,
                                              double t_k) {
  if (!std::isfinite(t_k)) throw DomainError("ackermann: non-finite time");
  const double dt = t_k - params.t_ref;
  const double a = params.omega * dt;
  RigidTransform out;
  out.rotation = yaw_about_z(a);
  if (std::abs(a) < 1e-6) {
    const double s = params.v * dt;
    out.translation = Eigen::Vector3d(s * (a * 0.5), s * (1.0 - a * a / 6.0),
                                      0.0);
  } else {
    const double radius = params.v / params.omega;
    out.translation =
        Eigen::Vector3d(radius * (1.0 - std::cos(a)), radius * std::sin(a),
                        0.0);
  }
  return out;
}

}  // namespace vwe
