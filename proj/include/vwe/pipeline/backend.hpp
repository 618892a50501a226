#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "vwe/objective/contrast.hpp"
#include "vwe/objective/optimizer.hpp"
#include "vwe/pipeline/frontend.hpp"
#include "vwe/trajectory/spline_fit.hpp"

namespace vwe {

// One level of the back-end refinement. Coarse levels pair wide kernels with
// long event windows: the wide kernel keeps drifted trajectories inside the
// contrast basin, and the long window makes slow trajectory bends visible at
// all (a deformation that is locally rigid over every window leaves each
// volume's relative poses, hence the whole objective, unchanged). Fine
// levels then sharpen the estimate.
struct BackendStage {
  double lateral_scale = 0.5;  // grid columns per sensor pixel
  double kernel_factor = 0.6;  // sigma0 in units of the lateral pitch
  int iterations = 20;
  double tau1 = 0.0;  // reference spacing; 0 = config default
  double tau2 = 0.0;  // window span; 0 = config default
  std::size_t max_events = 0;  // per-eval subsample cap; 0 = config default
};

struct BackendConfig {
  int degree = 3;
  int num_ctrl = 0;          // 0 = auto: ctrl_per_second * duration
  double ctrl_per_second = 2.0;
  MultiVolumeConfig volumes{0.2, 0.4, 0};  // volumes == 0: fill the stream
  // Equivalent image-space sigma per stage: 9.6, 3.6, 1.2, 1.2 pixels. The
  // third stage keeps long windows at the fine kernel so slow bends stay
  // observable; the last stage polishes at the configured window span.
  std::vector<BackendStage> stages{{0.125, 1.2, 30, 0.5, 2.0, 0},
                                   {0.25, 0.9, 30, 0.4, 1.2, 0},
                                   {0.5, 0.6, 40, 0.5, 1.5, 4000},
                                   {0.5, 0.6, 20, 0.0, 0.0, 0}};
  int depth_planes = 12;
  double z_min = 0.7;
  double z_max = 8.0;
  double kernel_truncation = 3.0;
  std::size_t min_events = 500;
  std::size_t max_events_per_eval = 2000;
  SolveNdOptions solver{1e-4, 1e-6, 25, 30, 0.01};

  GridSpec grid_for(const CameraModel& camera, double lateral_scale) const {
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

struct BackendResult {
  PlanarSpline spline;
  SplineFit fit;            // initial least-squares fit of the chained poses
  double initial_value = 0.0;  // objective of the fit at the finest stage
  double value = 0.0;          // refined objective at the finest stage
  int iterations = 0;
  bool backtracking_exhausted = false;
  std::vector<VolumeWindow> windows;
};

inline MultiVolumeConfig resolve_volume_count(EventSpan events,
                                              MultiVolumeConfig config) {
  if (config.volumes > 0) return config;
  const double duration = events.back().t - events.front().t;
  config.volumes = std::max(
      1, static_cast<int>(std::floor((duration - config.tau2) / config.tau1)) +
             1);
  return config;
}

namespace detail {

// Per-volume contrast evaluation under a candidate spline, plus the
// basis-support map that tells which volumes a control point can influence.
// Finite differences then re-evaluate only the affected volumes.
class SplineRefiner {
 public:
  SplineRefiner(EventSpan events, const CameraModel& camera,
                const Extrinsics& extrinsics,
                const std::vector<VolumeWindow>& windows,
                const GridSpec& grid_spec, const KernelSchedule& kernel,
                const ObjectiveOptions& opts)
      : events_(events),
        camera_(camera),
        extrinsics_(extrinsics),
        windows_(windows),
        grid_spec_(grid_spec),
        kernel_(kernel),
        opts_(opts) {
    opts_.accumulate_workers = 1;
  }

  double eval_volume(const PlanarSpline& spline, std::size_t j) const {
    if (windows_[j].count() < opts_.min_events) return 0.0;
    try {
      const SplineModel model(spline, extrinsics_);
      const DensityField field = vwe::detail::build_window_field(
          events_, model, camera_, windows_[j], grid_spec_, kernel_, opts_);
      return variance(field);
    } catch (const DomainError&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  // Full objective; volumes run in parallel, summed in volume order.
  double eval_all(const PlanarSpline& spline,
                  std::vector<double>& per_volume) const {
    per_volume.assign(windows_.size(), 0.0);
    double total = 0.0;
    ordered_parallel(
        windows_.size(),
        [&](std::size_t j) { return eval_volume(spline, j); },
        [&](std::size_t j, double v) {
          per_volume[j] = v;
          total += v;
        });
    return total;
  }

  // Volume indices whose event window intersects the support
  // [knots[i], knots[i+p+1]] of control point i.
  std::vector<std::size_t> affected_volumes(const PlanarSpline& spline,
                                            std::size_t ctrl) const {
    const double lo = spline.knots[ctrl];
    const double hi = spline.knots[ctrl + spline.degree + 1];
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < windows_.size(); ++j) {
      const double w_lo = windows_[j].t_r - windows_[j].half_span;
      const double w_hi = windows_[j].t_r + windows_[j].half_span;
      if (w_hi >= lo && w_lo <= hi) out.push_back(j);
    }
    return out;
  }

 private:
  EventSpan events_;
  const CameraModel& camera_;
  const Extrinsics& extrinsics_;
  const std::vector<VolumeWindow>& windows_;
  GridSpec grid_spec_;
  KernelSchedule kernel_;
  ObjectiveOptions opts_;
};

struct StageOutcome {
  double value = 0.0;
  int iterations = 0;
  bool backtracking_exhausted = false;
};

// Monotone gradient ascent over the free spline coordinates at one
// resolution level.
template <class ApplyFree, class CtrlOfCoord>
StageOutcome refine_stage(const SplineRefiner& refiner,
                          const SolveNdOptions& solver, int max_iterations,
                          const ApplyFree& apply_free,
                          const CtrlOfCoord& ctrl_of_coord,
                          Eigen::VectorXd& free, PlanarSpline& spline) {
  StageOutcome outcome;
  std::vector<double> per_volume;
  double value = refiner.eval_all(spline, per_volume);
  if (!std::isfinite(value))
    throw NumericalError("back end: objective is not finite at the fit");
  const int n_free = static_cast<int>(free.size());
  double alpha = solver.initial_step;
  const double h = solver.fd_step;

  for (int it = 0; it < max_iterations; ++it) {
    ++outcome.iterations;
    std::vector<double> probe_value(2 * n_free, 0.0);
    ordered_parallel(
        probe_value.size(),
        [&](std::size_t pi) {
          const int coord = static_cast<int>(pi / 2);
          const double sign = (pi % 2 == 0) ? 1.0 : -1.0;
          Eigen::VectorXd probe_free = free;
          probe_free[coord] += sign * h;
          const PlanarSpline candidate = apply_free(probe_free);
          double delta = 0.0;
          for (std::size_t j :
               refiner.affected_volumes(candidate, ctrl_of_coord(coord)))
            delta += refiner.eval_volume(candidate, j) - per_volume[j];
          return delta;
        },
        [&](std::size_t pi, double v) { probe_value[pi] = v; });
    Eigen::VectorXd grad(n_free);
    bool finite = true;
    for (int c = 0; c < n_free; ++c) {
      const double dp = probe_value[2 * c];
      const double dm = probe_value[2 * c + 1];
      if (!std::isfinite(dp) || !std::isfinite(dm)) finite = false;
      grad[c] = (dp - dm) / (2.0 * h);
    }
    if (!finite)
      throw NumericalError("back end: objective is not finite near iterate");
    const double gnorm = grad.norm();
    if (gnorm == 0.0) break;
    const Eigen::VectorXd direction = grad / gnorm;

    bool accepted = false;
    double trial = alpha;
    for (int bt = 0; bt < solver.max_backtracks; ++bt) {
      const Eigen::VectorXd cand_free = free + trial * direction;
      const PlanarSpline cand = apply_free(cand_free);
      std::vector<double> cand_per_volume;
      const double cand_value = refiner.eval_all(cand, cand_per_volume);
      if (std::isfinite(cand_value) && cand_value > value) {
        const double gain =
            (cand_value - value) / std::max(std::abs(value), 1e-300);
        free = cand_free;
        spline = cand;
        per_volume = std::move(cand_per_volume);
        value = cand_value;
        accepted = true;
        alpha = std::min(trial * 1.5, 0.2);
        if (gain < solver.rel_gain_tol) it = max_iterations;  // converged
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) {
      outcome.backtracking_exhausted = true;
      break;
    }
  }
  outcome.value = value;
  return outcome;
}

}  // namespace detail

// Back-end refinement: fit a spline to the dead-reckoned front-end poses,
// then run coarse-to-fine gradient ascent on the summed multi-volume
// contrast over the control points (first point and first chord direction
// pinned, chord length free).
inline BackendResult run_backend(EventSpan events, const CameraModel& camera,
                                 const Extrinsics& extrinsics,
                                 const std::vector<PoseSample>& chained,
                                 const BackendConfig& config) {
  if (events.empty()) throw InsufficientDataError("back end: empty stream");
  if (chained.size() < 4)
    throw DomainError("back end: need a front-end trajectory");
  if (config.stages.empty()) throw DomainError("back end: no stages");
  const double duration = chained.back().t - chained.front().t;
  int num_ctrl = config.num_ctrl;
  if (num_ctrl <= 0)
    num_ctrl = std::max(config.degree + 1,
                        static_cast<int>(std::lround(
                            config.ctrl_per_second * duration)));
  num_ctrl = std::min<int>(num_ctrl, static_cast<int>(chained.size()));

  BackendResult result;
  result.fit = fit_spline(chained, config.degree, num_ctrl);
  const int n_pts = num_ctrl;

  const auto [dom_lo, dom_hi] = result.fit.spline.domain();
  auto stage_windows = [&](const BackendStage& st) {
    MultiVolumeConfig mv = config.volumes;
    if (st.tau1 > 0.0) mv.tau1 = st.tau1;
    if (st.tau2 > 0.0) mv.tau2 = st.tau2;
    mv.volumes = 0;
    mv = resolve_volume_count(events, mv);
    std::vector<VolumeWindow> windows = make_volume_windows(events, mv);
    for (const VolumeWindow& w : windows)
      if (w.t_r - w.half_span < dom_lo - 1e-9 ||
          w.t_r + w.half_span > dom_hi + 1e-9)
        throw DomainError("back end: front-end trajectory does not span all "
                          "volume windows");
    return windows;
  };

  ObjectiveOptions opts;
  opts.min_events = config.min_events;
  opts.max_events_per_eval = config.max_events_per_eval;
  const std::vector<Eigen::Vector3d> bearings =
      compute_bearings(events, camera);
  opts.bearings = &bearings;

  // Gauge: P0 pinned, the direction P0 -> P1 pinned, chord length free.
  PlanarSpline spline = result.fit.spline;
  const Eigen::Vector2d p0 = spline.control_points[0];
  const Eigen::Vector2d chord0 =
      spline.control_points[1] - spline.control_points[0];
  if (chord0.norm() < 1e-12)
    throw NumericalError("back end: degenerate first chord");
  const Eigen::Vector2d gauge_dir = chord0.normalized();

  // Free coordinates: chord length, then x/y of control points 2..n.
  const int n_free = 1 + 2 * (n_pts - 2);
  auto apply_free = [&](const Eigen::VectorXd& free_vec) {
    PlanarSpline s = result.fit.spline;
    s.control_points[1] = p0 + std::max(free_vec[0], 1e-9) * gauge_dir;
    for (int i = 2; i < n_pts; ++i) {
      s.control_points[i].x() = free_vec[1 + 2 * (i - 2)];
      s.control_points[i].y() = free_vec[2 + 2 * (i - 2)];
    }
    return s;
  };
  auto ctrl_of_coord = [&](int c) {
    return static_cast<std::size_t>(c == 0 ? 1 : 2 + (c - 1) / 2);
  };
  Eigen::VectorXd free(n_free);
  free[0] = chord0.norm();
  for (int i = 2; i < n_pts; ++i) {
    free[1 + 2 * (i - 2)] = spline.control_points[i].x();
    free[2 + 2 * (i - 2)] = spline.control_points[i].y();
  }

  for (std::size_t stage = 0; stage < config.stages.size(); ++stage) {
    const BackendStage& st = config.stages[stage];
    const GridSpec grid_spec = config.grid_for(camera, st.lateral_scale);
    const KernelSchedule kernel = KernelSchedule::proportional(
        VoxelGrid::make(camera, grid_spec), st.kernel_factor,
        config.kernel_truncation);
    const std::vector<VolumeWindow> windows = stage_windows(st);
    ObjectiveOptions stage_opts = opts;
    if (st.max_events > 0) stage_opts.max_events_per_eval = st.max_events;
    detail::SplineRefiner refiner(events, camera, extrinsics, windows,
                                  grid_spec, kernel, stage_opts);
    if (stage + 1 == config.stages.size()) {
      std::vector<double> per_volume;
      result.initial_value = refiner.eval_all(result.fit.spline, per_volume);
      result.windows = windows;
    }
    const detail::StageOutcome outcome =
        detail::refine_stage(refiner, config.solver, st.iterations,
                             apply_free, ctrl_of_coord, free, spline);
    result.iterations += outcome.iterations;
    result.backtracking_exhausted = outcome.backtracking_exhausted;
    if (stage + 1 == config.stages.size()) result.value = outcome.value;
  }

  result.spline = spline;
  return result;
}

}  // namespace vwe
