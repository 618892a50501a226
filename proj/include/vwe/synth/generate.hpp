#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vwe/core/camera.hpp"
#include "vwe/core/event.hpp"
#include "vwe/synth/scene.hpp"
#include "vwe/trajectory/model.hpp"

namespace vwe {

struct GroundTruthBundle {
  std::vector<Event> events;
  std::vector<double> true_depth;     // camera depth per event, aligned
  std::vector<int> source_point;      // scene point index per event, aligned
  std::vector<PoseSample> trajectory; // dense vehicle poses
  SyntheticScene scene;
  double max_reprojection_px = 0.0;   // self-check over all events
};

struct GenerateOptions {
  double sampling_dt = 1e-3;     // trajectory sampling step
  double pixel_threshold = 1.0;  // emit after this much image motion
  double z_near = 0.2;           // points closer than this are invisible
  double truth_dt = 0.01;        // ground-truth pose sampling
  std::uint64_t seed = 1;
};

namespace detail {

struct PointTrace {
  std::vector<Event> events;
  std::vector<double> depths;
};

// Events of a single scene point: displacement-threshold model. Whenever the
// projection has moved at least one pixel since the last emission, an event
// fires at a time jittered inside the step, with the exact sub-pixel
// projection at that jittered time.
inline PointTrace trace_point(const Eigen::Vector3d& point, int point_index,
                              const TrajectoryModel& model,
                              const CameraModel& camera, double t0,
                              double duration, const GenerateOptions& opt) {
  PointTrace trace;
  std::mt19937_64 rng(opt.seed ^
                      (0x9e3779b97f4a7c15ull * (point_index + 1)));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int steps = static_cast<int>(std::floor(duration / opt.sampling_dt));
  bool have_last = false;
  Eigen::Vector2d last_px = Eigen::Vector2d::Zero();
  int emitted = 0;

  auto observe = [&](double t) -> std::pair<bool, Eigen::Vector3d> {
    const RigidTransform cam = model.camera_pose(t);
    const Eigen::Vector3d local =
        cam.rotation.transpose() * (point - cam.translation);
    if (local.z() < opt.z_near) return {false, local};
    return {true, local};
  };

  for (int j = 0; j <= steps; ++j) {
    const double t = t0 + j * opt.sampling_dt;
    auto [visible, local] = observe(t);
    Eigen::Vector2d px;
    if (visible) {
      px = project(camera, local);
      visible = in_bounds(camera, px);
    }
    if (!visible) {
      have_last = false;
      continue;
    }
    if (!have_last) {
      have_last = true;
      last_px = px;
      continue;
    }
    if ((px - last_px).norm() < opt.pixel_threshold) continue;
    const double t_event =
        std::min(t0 + duration, t + uniform(rng) * opt.sampling_dt);
    auto [vis_e, local_e] = observe(t_event);
    if (vis_e) {
      const Eigen::Vector2d px_e = project(camera, local_e);
      if (in_bounds(camera, px_e)) {
        Event e;
        e.t = t_event;
        e.x = px_e.x();
        e.y = px_e.y();
        e.polarity = ((point_index + emitted) % 2 == 0) ? 1 : -1;
        trace.events.push_back(e);
        trace.depths.push_back(local_e.z());
        ++emitted;
      }
    }
    last_px = px;
  }
  return trace;
}

}  // namespace detail

// Generates a ground-truth bundle from an edge scene and a trajectory.
// Deterministic for a fixed seed regardless of the worker count: points are
// traced independently with per-point generators and merged by a total order
// on (t, point, sequence).
inline GroundTruthBundle generate_events(const SyntheticScene& scene,
                                         const TrajectoryModel& model,
                                         const CameraModel& camera, double t0,
                                         double duration,
                                         const GenerateOptions& opt = {}) {
  scene.validate();
  if (!(duration > 0.0)) throw DomainError("generate: duration must be > 0");
  const std::vector<Eigen::Vector3d> points = scene.sample_points();

  struct Tagged {
    Event e;
    double depth;
    int point;
    int seq;
  };
  std::vector<Tagged> all;
  const std::size_t block = 64;
  const std::size_t n_blocks = (points.size() + block - 1) / block;
  auto make = [&](std::size_t b) {
    std::vector<Tagged> out;
    const std::size_t begin = b * block;
    const std::size_t end = std::min(points.size(), begin + block);
    for (std::size_t p = begin; p < end; ++p) {
      detail::PointTrace trace = detail::trace_point(
          points[p], static_cast<int>(p), model, camera, t0, duration, opt);
      for (std::size_t k = 0; k < trace.events.size(); ++k)
        out.push_back({trace.events[k], trace.depths[k], static_cast<int>(p),
                       static_cast<int>(k)});
    }
    return out;
  };
  auto consume = [&](std::size_t, std::vector<Tagged> part) {
    all.insert(all.end(), part.begin(), part.end());
  };
  ordered_parallel(n_blocks, make, consume);

  if (all.empty())
    throw DomainError("generate: no visible scene points produced events");
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    if (a.e.t != b.e.t) return a.e.t < b.e.t;
    if (a.point != b.point) return a.point < b.point;
    return a.seq < b.seq;
  });

  GroundTruthBundle bundle;
  bundle.scene = scene;
  bundle.events.reserve(all.size());
  for (const Tagged& tg : all) {
    bundle.events.push_back(tg.e);
    bundle.true_depth.push_back(tg.depth);
    bundle.source_point.push_back(tg.point);
  }

  const int truth_steps =
      static_cast<int>(std::ceil(duration / opt.truth_dt));
  for (int j = 0; j <= truth_steps; ++j) {
    const double t = std::min(t0 + duration, t0 + j * opt.truth_dt);
    bundle.trajectory.push_back({t, model.vehicle_pose(t)});
  }

  // Self-check: every event must reproject onto its source point.
  for (std::size_t i = 0; i < bundle.events.size(); ++i) {
    const Event& e = bundle.events[i];
    const RigidTransform cam = model.camera_pose(e.t);
    const Eigen::Vector3d local =
        cam.rotation.transpose() *
        (points[bundle.source_point[i]] - cam.translation);
    const Eigen::Vector2d px = project(camera, local);
    bundle.max_reprojection_px =
        std::max(bundle.max_reprojection_px,
                 (px - Eigen::Vector2d(e.x, e.y)).norm());
  }
  return bundle;
}

}  // namespace vwe
