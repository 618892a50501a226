#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vwe/pipeline/frontend.hpp"
#include "vwe/synth/generate.hpp"
#include "vwe/trajectory/spline_fit.hpp"

namespace vwe {

struct SuiteBundle {
  std::string name;
  GroundTruthBundle bundle;
  CameraModel camera;
  Extrinsics extrinsics;
  double v_true = 0.5;
  std::optional<double> omega_true;
  std::shared_ptr<TrajectoryModel> truth_model;
  GridSpec map_grid{64, 48, 32, 0.5, 10.0};
  double duration = 0.0;
};

namespace detail {

inline CameraModel suite_camera() {
  CameraModel c;
  c.fx = c.fy = 230.0;
  c.cx = 173.0;
  c.cy = 130.0;
  c.width = 346;
  c.height = 260;
  c.distortion = {-0.05, 0.01, 0.0, 0.0, 0.0};
  return c;
}

// Vertical edges lining both sides of the driven path, with occasional cross
// bars; anchors extend past the end of the run so the camera always faces
// structure.
inline SyntheticScene corridor_scene(const TrajectoryModel& model,
                                     double duration, std::uint64_t seed,
                                     double points_per_meter,
                                     double lookahead = 4.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lat(0.8, 1.8);
  std::uniform_real_distribution<double> z_lo(-0.45, -0.15);
  std::uniform_real_distribution<double> z_hi(0.35, 0.9);
  std::uniform_real_distribution<double> bar_h(0.2, 0.6);
  const auto [dom_lo, dom_hi] = model.domain();
  SyntheticScene scene;
  scene.points_per_meter = points_per_meter;
  int anchor_index = 0;
  // Anchors run well past the end of the trajectory so the camera keeps
  // facing structure through the last window.
  for (double ta = 0.0; ta <= duration + lookahead; ta += 0.25,
              ++anchor_index) {
    RigidTransform pose;
    if (ta <= dom_hi) {
      pose = model.vehicle_pose(std::max(ta, dom_lo));
    } else {
      // Extend straight past the trajectory end along the final heading.
      const RigidTransform end = model.vehicle_pose(dom_hi);
      pose = end;
      pose.translation += end.rotation.col(1) * 0.5 * (ta - dom_hi);
    }
    const Eigen::Vector3d right = pose.rotation.col(0);
    const Eigen::Vector3d up(0.0, 0.0, 1.0);
    Eigen::Vector3d bases[2];
    for (int side = 0; side < 2; ++side) {
      const double offset = (side == 0 ? -1.0 : 1.0) * lat(rng);
      bases[side] = pose.translation + right * offset;
      scene.segments.push_back(
          {bases[side] + up * z_lo(rng), bases[side] + up * z_hi(rng)});
    }
    if (anchor_index % 3 == 2) {
      const double h = bar_h(rng);
      scene.segments.push_back({bases[0] + up * h, bases[1] + up * h});
    }
  }
  return scene;
}

// Grid of bars on the world plane y = distance (frontal wall for a vehicle
// starting at the origin with heading +y).
inline void add_wall(SyntheticScene& scene, double distance, double x_lo,
                     double x_hi, double z_lo, double z_hi, int n_vertical,
                     int n_horizontal) {
  for (int i = 0; i < n_vertical; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / (n_vertical - 1.0);
    scene.segments.push_back({Eigen::Vector3d(x, distance, z_lo),
                              Eigen::Vector3d(x, distance, z_hi)});
  }
  for (int j = 0; j < n_horizontal; ++j) {
    const double z = z_lo + (z_hi - z_lo) * j / (n_horizontal - 1.0);
    scene.segments.push_back({Eigen::Vector3d(x_lo, distance, z),
                              Eigen::Vector3d(x_hi, distance, z)});
  }
}

// Smooth ground-truth trajectory with piecewise-varying turn rate: chained
// arcs sampled densely and approximated by a cubic spline, so the truth is a
// C2 curve with near-constant speed.
inline std::shared_ptr<SplineModel> long_truth_model(
    const Extrinsics& extrinsics, double v, double duration) {
  const double third = duration / 3.0;
  std::vector<PiecewiseAckermannModel::Piece> pieces;
  RigidTransform chain;
  const double omegas[3] = {0.35, -0.30, 0.15};
  for (int i = 0; i < 3; ++i) {
    pieces.push_back({i * third, (i + 1) * third, omegas[i], chain});
    chain = compose(chain, ackermann_relative_pose(
                               {omegas[i], v, i * third}, (i + 1) * third));
  }
  const PiecewiseAckermannModel arcs(pieces, v, extrinsics);
  std::vector<PoseSample> samples;
  for (double t = 0.0; t <= duration + 1e-9; t += 0.05)
    samples.push_back({t, arcs.vehicle_pose(std::min(t, duration))});
  const SplineFit fit = fit_spline(samples, 3, 16);
  return std::make_shared<SplineModel>(fit.spline, extrinsics);
}

}  // namespace detail

inline std::vector<std::string> standard_suite_names() {
  return {"circle", "str", "long", "wall", "twowall"};
}

// Deterministic named bundles used by the acceptance runs: `circle` (constant
// turn rate), `str` (straight), `long` (varying turn rate on a spline),
// `wall` and `twowall` (frontal structure for depth recovery).
inline SuiteBundle make_suite(const std::string& name,
                              std::uint64_t seed = 7) {
  SuiteBundle suite;
  suite.name = name;
  suite.camera = detail::suite_camera();
  suite.extrinsics = Extrinsics::forward_facing();
  suite.v_true = 0.5;
  GenerateOptions opt;
  opt.seed = seed * 1000003 + 17;

  if (name == "circle" || name == "str") {
    const double omega = (name == "circle") ? 0.3 : 0.0;
    suite.duration = (name == "circle") ? 4.5 : 3.0;
    suite.omega_true = omega;
    suite.truth_model = std::make_shared<AckermannModel>(
        AckermannParams{omega, suite.v_true, 0.0}, suite.extrinsics);
    const double ppm = (name == "circle") ? 110.0 : 220.0;
    const SyntheticScene scene = detail::corridor_scene(
        *suite.truth_model, suite.duration, seed, ppm);
    suite.bundle = generate_events(scene, *suite.truth_model, suite.camera,
                                   0.0, suite.duration, opt);
  } else if (name == "long") {
    suite.duration = 6.0;
    suite.truth_model =
        detail::long_truth_model(suite.extrinsics, suite.v_true,
                                 suite.duration);
    const SyntheticScene scene = detail::corridor_scene(
        *suite.truth_model, suite.duration, seed, 80.0);
    suite.bundle = generate_events(scene, *suite.truth_model, suite.camera,
                                   0.0, suite.duration, opt);
  } else if (name == "wall" || name == "twowall") {
    suite.duration = (name == "wall") ? 1.5 : 1.2;
    suite.truth_model = std::make_shared<AckermannModel>(
        AckermannParams{0.0, suite.v_true, 0.0}, suite.extrinsics);
    suite.omega_true = 0.0;
    SyntheticScene scene;
    scene.points_per_meter = 70.0;
    if (name == "wall") {
      detail::add_wall(scene, 2.0, -1.3, 1.3, -0.6, 0.8, 15, 8);
    } else {
      detail::add_wall(scene, 1.5, -1.1, -0.2, -0.5, 0.8, 7, 5);
      detail::add_wall(scene, 3.0, 0.3, 1.7, -0.5, 0.8, 9, 5);
    }
    suite.bundle = generate_events(scene, *suite.truth_model, suite.camera,
                                   0.0, suite.duration, opt);
  } else {
    throw DomainError("unknown suite: " + name);
  }
  return suite;
}

}  // namespace vwe
