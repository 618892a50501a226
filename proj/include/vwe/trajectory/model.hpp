#pragma once

#include <limits>
#include <memory>
#include <utility>

#include "vwe/core/io.hpp"
#include "vwe/core/transform.hpp"
#include "vwe/trajectory/ackermann.hpp"
#include "vwe/trajectory/bspline.hpp"

namespace vwe {

// Continuous-time trajectory s(t|theta): vehicle pose as a function of time,
// with the camera hanging off the vehicle through fixed extrinsics. Pose
// evaluation is pure and safe to call concurrently.
class TrajectoryModel {
 public:
  explicit TrajectoryModel(Extrinsics extrinsics) : extrinsics_(extrinsics) {}
  virtual ~TrajectoryModel() = default;

  virtual RigidTransform vehicle_pose(double t) const = 0;
  virtual std::pair<double, double> domain() const = 0;

  const Extrinsics& extrinsics() const { return extrinsics_; }

  RigidTransform camera_pose(double t) const {
    return compose(vehicle_pose(t), extrinsics_.camera_to_vehicle());
  }

 private:
  Extrinsics extrinsics_;
};

class AckermannModel final : public TrajectoryModel {
 public:
  AckermannModel(AckermannParams params, Extrinsics extrinsics)
      : TrajectoryModel(extrinsics), params_(params) {
    if (!(params.v > 0.0)) throw DomainError("ackermann: v must be positive");
    if (!std::isfinite(params.omega))
      throw DomainError("ackermann: omega must be finite");
  }

  RigidTransform vehicle_pose(double t) const override {
    // World frame anchored at the vehicle frame of t_ref.
    return ackermann_relative_pose(params_, t);
  }

  std::pair<double, double> domain() const override {
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }

  const AckermannParams& params() const { return params_; }

 private:
  AckermannParams params_;
};

// Tangential orientation from the curve derivative: heading is the +y column,
// x is the heading rotated -90 degrees, z stays vertical. The printed matrix
// is only orthonormal for a unit tangent, so the velocity is normalized
// first; headings are direction, not speed.
inline RigidTransform spline_pose(const PlanarSpline& s, double t,
                                  double min_speed = 1e-8) {
  const Eigen::Vector2d c = spline_position(s, t);
  const Eigen::Vector2d v = spline_velocity(s, t);
  const double speed = v.norm();
  if (!(speed > min_speed))
    throw DomainError("spline_pose: degenerate heading (|c'(t)| ~ 0)");
  const Eigen::Vector2d h = v / speed;
  RigidTransform out;
  out.rotation.col(0) = Eigen::Vector3d(h.y(), -h.x(), 0.0);
  out.rotation.col(1) = Eigen::Vector3d(h.x(), h.y(), 0.0);
  out.rotation.col(2) = Eigen::Vector3d(0.0, 0.0, 1.0);
  out.translation = Eigen::Vector3d(c.x(), c.y(), 0.0);
  return out;
}

class SplineModel final : public TrajectoryModel {
 public:
  SplineModel(PlanarSpline spline, Extrinsics extrinsics,
              double min_speed = 1e-8)
      : TrajectoryModel(extrinsics),
        spline_(std::move(spline)),
        derivative_(derivative_spline(spline_)),
        min_speed_(min_speed) {
    spline_.validate();
  }

  RigidTransform vehicle_pose(double t) const override {
    check_in_domain(spline_, t);
    const Eigen::Vector2d c = eval(spline_, t);
    const Eigen::Vector2d v = eval(derivative_, t);
    const double speed = v.norm();
    if (!(speed > min_speed_))
      throw DomainError("spline_pose: degenerate heading (|c'(t)| ~ 0)");
    const Eigen::Vector2d h = v / speed;
    RigidTransform out;
    out.rotation.col(0) = Eigen::Vector3d(h.y(), -h.x(), 0.0);
    out.rotation.col(1) = Eigen::Vector3d(h.x(), h.y(), 0.0);
    out.rotation.col(2) = Eigen::Vector3d(0.0, 0.0, 1.0);
    out.translation = Eigen::Vector3d(c.x(), c.y(), 0.0);
    return out;
  }

  std::pair<double, double> domain() const override {
    return spline_.domain();
  }

  const PlanarSpline& spline() const { return spline_; }

 private:
  static Eigen::Vector2d eval(const PlanarSpline& s, double t) {
    const int span = detail::find_span(s, t);
    thread_local std::vector<double> basis;
    detail::basis_functions(s, span, t, basis);
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (int i = 0; i <= s.degree; ++i)
      out += basis[i] * s.control_points[span - s.degree + i];
    return out;
  }

  PlanarSpline spline_;
  PlanarSpline derivative_;  // cached; evaluated per event in hot loops
  double min_speed_;
};

// Wraps a model with one common world transform. Relative poses are
// unchanged, which is exactly the gauge freedom of the contrast objectives.
class WorldTransformedModel final : public TrajectoryModel {
 public:
  WorldTransformedModel(const TrajectoryModel& base, RigidTransform g)
      : TrajectoryModel(base.extrinsics()), base_(&base), g_(std::move(g)) {}

  RigidTransform vehicle_pose(double t) const override {
    return compose(g_, base_->vehicle_pose(t));
  }

  std::pair<double, double> domain() const override { return base_->domain(); }

 private:
  const TrajectoryModel* base_;
  RigidTransform g_;
};

}  // namespace vwe
