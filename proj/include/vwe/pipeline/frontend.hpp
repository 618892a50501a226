#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "vwe/core/event.hpp"
#include "vwe/field/accumulate.hpp"
#include "vwe/objective/optimizer.hpp"
#include "vwe/objective/variance.hpp"
#include "vwe/trajectory/model.hpp"

namespace vwe {

struct FrontEndConfig {
  double window_span = 0.1;   // seconds per front-end volume
  double v = 0.5;             // configured forward speed, m/s
  std::size_t min_events = 500;
  double omega_lo = -1.0;     // rad/s
  double omega_hi = 1.0;
  // Sensor-proportional lateral sampling keeps the kernel near one pixel,
  // which is what makes the variance peak sharp at 0.1 s baselines; a few
  // depth planes suffice for the 1-DoF solve.
  double lateral_scale = 1.0;  // grid columns per sensor pixel
  int depth_planes = 8;
  double z_min = 0.8;
  double z_max = 8.0;
  double kernel_factor = 0.5;     // sigma0 in units of the lateral pitch
  double kernel_truncation = 3.0;
  std::size_t max_events_per_eval = 6000;
  Solve1dOptions solver;
  int chain_samples_per_window = 5;

  GridSpec grid_for(const CameraModel& camera) const {
    GridSpec g;
    g.nx = std::max(8, static_cast<int>(std::lround(camera.width *
                                                    lateral_scale)));
    g.ny = std::max(8, static_cast<int>(std::lround(camera.height *
                                                    lateral_scale)));
    g.nz = depth_planes;
    g.z_min = z_min;
    g.z_max = z_max;
    return g;
  }
};

struct FrontEndSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double omega = 0.0;
  double value = 0.0;
  std::size_t event_count = 0;
  bool carried_over = false;    // too few events, omega copied from previous
  bool boundary_warning = false;
};

// Chained constant-velocity arcs; the pose is continuous across segment
// boundaries by construction.
class PiecewiseAckermannModel final : public TrajectoryModel {
 public:
  struct Piece {
    double t_start;
    double t_end;
    double omega;
    RigidTransform base;  // vehicle pose at t_start
  };

  PiecewiseAckermannModel(std::vector<Piece> pieces, double v,
                          Extrinsics extrinsics)
      : TrajectoryModel(extrinsics), pieces_(std::move(pieces)), v_(v) {
    if (pieces_.empty()) throw DomainError("piecewise model: no segments");
  }

  RigidTransform vehicle_pose(double t) const override {
    const Piece& piece = locate(t);
    return compose(piece.base,
                   ackermann_relative_pose({piece.omega, v_, piece.t_start},
                                           t));
  }

  std::pair<double, double> domain() const override {
    return {pieces_.front().t_start, pieces_.back().t_end};
  }

 private:
  const Piece& locate(double t) const {
    if (t <= pieces_.front().t_start) return pieces_.front();
    for (const Piece& p : pieces_)
      if (t < p.t_end) return p;
    return pieces_.back();
  }

  std::vector<Piece> pieces_;
  double v_;
};

struct FrontEndResult {
  std::vector<FrontEndSegment> segments;
  std::vector<PoseSample> chained_trajectory;  // vehicle-to-world
  std::shared_ptr<PiecewiseAckermannModel> model;
  double v = 0.0;
};

// Cuts the stream into consecutive windows of window_span, solves the
// 1-DoF arc model per window (warm-started from the previous window), and
// chains the segment poses into a continuous dead-reckoned trajectory. The
// first vehicle pose is the world frame.
inline FrontEndResult run_frontend(EventSpan events, const CameraModel& camera,
                                   const Extrinsics& extrinsics,
                                   const FrontEndConfig& config) {
  if (events.empty()) throw InsufficientDataError("front end: empty stream");
  if (!is_sorted_by_time(events))
    throw DataError("front end: stream is not sorted");
  if (!(config.window_span > 0.0) || !(config.v > 0.0))
    throw DomainError("front end: window_span and v must be positive");

  const double t0 = events.front().t;
  const double t_end = events.back().t;
  const int n_windows = std::max(
      1, static_cast<int>(std::floor((t_end - t0) / config.window_span)) + 1);

  const VoxelGrid grid = VoxelGrid::make(camera, config.grid_for(camera));
  const KernelSchedule kernel = KernelSchedule::proportional(
      grid, config.kernel_factor, config.kernel_truncation);

  FrontEndResult result;
  result.v = config.v;
  std::optional<double> prev_omega;
  std::vector<PiecewiseAckermannModel::Piece> pieces;
  RigidTransform chain = RigidTransform::identity();

  for (int i = 0; i < n_windows; ++i) {
    const double ws = t0 + i * config.window_span;
    const double we = ws + config.window_span;
    // Half-open windows [ws, we): an event exactly at the edge goes right;
    // the final window keeps its trailing events.
    const std::size_t first = static_cast<std::size_t>(
        std::lower_bound(events.begin(), events.end(), ws,
                         [](const Event& e, double v) { return e.t < v; }) -
        events.begin());
    const std::size_t last =
        (i + 1 == n_windows)
            ? events.size()
            : static_cast<std::size_t>(
                  std::lower_bound(
                      events.begin(), events.end(), we,
                      [](const Event& e, double v) { return e.t < v; }) -
                  events.begin());

    FrontEndSegment seg;
    seg.t_start = ws;
    seg.t_end = t0 + (i + 1) * config.window_span;
    if (i + 1 == n_windows) seg.t_end = std::max(seg.t_end, t_end);
    seg.event_count = last - first;

    if (seg.event_count < config.min_events) {
      seg.omega = prev_omega.value_or(0.0);
      seg.carried_over = true;
    } else {
      const double t_r = 0.5 * (seg.t_start + seg.t_end);
      EventSpan window = events.subspan(first, last - first);
      std::vector<Event> sub;
      if (config.max_events_per_eval > 0 &&
          window.size() > config.max_events_per_eval) {
        const std::size_t stride =
            (window.size() + config.max_events_per_eval - 1) /
            config.max_events_per_eval;
        for (std::size_t k = 0; k < window.size(); k += stride)
          sub.push_back(window[k]);
        window = EventSpan(sub);
      }
      const std::vector<Eigen::Vector3d> bearings =
          compute_bearings(window, camera);
      auto objective = [&](double omega) {
        const AckermannModel model({omega, config.v, t_r}, extrinsics);
        const DensityField field = accumulate_fast(
            window, model, camera, grid, kernel, t_r, &bearings);
        return variance(field);
      };
      const Solve1dResult solved =
          solve_1d(objective, config.omega_lo, config.omega_hi, prev_omega,
                   config.solver);
      seg.omega = solved.omega;
      seg.value = solved.value;
      seg.boundary_warning = solved.boundary_warning;
      prev_omega = solved.omega;
    }

    pieces.push_back({seg.t_start, seg.t_end, seg.omega, chain});
    const AckermannParams params{seg.omega, config.v, seg.t_start};
    const int k = std::max(1, config.chain_samples_per_window);
    for (int j = 0; j < k; ++j) {
      const double t =
          seg.t_start + (seg.t_end - seg.t_start) * j / static_cast<double>(k);
      result.chained_trajectory.push_back(
          {t, compose(chain, ackermann_relative_pose(params, t))});
    }
    chain = compose(chain, ackermann_relative_pose(params, seg.t_end));
    result.segments.push_back(seg);
  }
  result.chained_trajectory.push_back(
      {result.segments.back().t_end, chain});
  result.model = std::make_shared<PiecewiseAckermannModel>(
      std::move(pieces), config.v, extrinsics);
  return result;
}

// Total path length implied by the chained segment poses: per segment the
// chord between the endpoint poses is converted to the arc length of the
// estimated turn rate. With a fixed forward speed this must equal
// v * duration, which pins the dead-reckoned scale.
inline double path_arc_length(const FrontEndResult& frontend) {
  double total = 0.0;
  for (const FrontEndSegment& seg : frontend.segments) {
    const Eigen::Vector3d p0 =
        frontend.model->vehicle_pose(seg.t_start).translation;
    const Eigen::Vector3d p1 =
        frontend.model->vehicle_pose(seg.t_end).translation;
    const double chord = (p1 - p0).norm();
    const double half_angle =
        0.5 * seg.omega * (seg.t_end - seg.t_start);
    total += std::abs(half_angle) < 1e-9
                 ? chord
                 : chord * half_angle / std::sin(half_angle);
  }
  return total;
}

}  // namespace vwe
