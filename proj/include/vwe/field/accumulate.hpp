#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "vwe/core/camera.hpp"
#include "vwe/core/event.hpp"
#include "vwe/core/ray.hpp"
#include "vwe/field/voxel_grid.hpp"
#include "vwe/trajectory/model.hpp"

namespace vwe {

// Unit bearings of the events in the camera frame; they do not depend on the
// motion parameters, so solvers compute them once per window.
inline std::vector<Eigen::Vector3d> compute_bearings(
    EventSpan events, const CameraModel& camera) {
  std::vector<Eigen::Vector3d> out(events.size());
  for (std::size_t i = 0; i < events.size(); ++i)
    out[i] = unproject(camera, {events[i].x, events[i].y});
  return out;
}

// Event ray in the reference camera frame at t_r: origin and direction come
// from the relative pose T_rk = T_wr^{-1} T_wk of the event camera frame.
inline BearingRay warp_event_to_ray(const Event& e,
                                    const TrajectoryModel& model,
                                    const CameraModel& camera, double t_r) {
  const RigidTransform t_rk =
      compose(inverse(model.camera_pose(t_r)), model.camera_pose(e.t));
  BearingRay ray;
  ray.origin = t_rk.translation;
  ray.direction = (t_rk.rotation * unproject(camera, {e.x, e.y})).normalized();
  ray.t = e.t;
  return ray;
}

namespace detail {

struct SkipCounts {
  std::uint64_t parallel = 0;
  std::uint64_t behind = 0;
};

// Splats one ray into every voxel of the planes [l0, l1) (reference
// implementation: no truncation, all voxels).
inline void splat_ray_naive(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                            const VoxelGrid& grid,
                            const std::vector<double>& inv_two_sigma_sq,
                            int l0, int l1, std::vector<double>& scratch,
                            double* values) {
  const auto& spec = grid.spec;
  for (int l = l0; l < l1; ++l) {
    const double depth = grid.depth_planes[l];
    const double coef = inv_two_sigma_sq[l];
    const double wz = depth - o.z();
    for (int n = 0; n < spec.ny; ++n) {
      const double wy = depth * grid.lat_y[n] - o.y();
      // eps^2 = |w|^2 - (d.w)^2 with w = (wx, wy, wz), wx linear in m.
      const double a = d.y() * wy + d.z() * wz;
      const double b = wy * wy + wz * wz;
      for (int m = 0; m < spec.nx; ++m) {
        const double wx = depth * grid.lat_x[m] - o.x();
        const double dw = d.x() * wx + a;
        scratch[m] = -(wx * wx + b - dw * dw) * coef;
      }
      Eigen::Map<Eigen::ArrayXd> args(scratch.data(), spec.nx);
      args = args.exp();
      double* row = values + grid.index(0, n, l);
      for (int m = 0; m < spec.nx; ++m) row[m] += scratch[m];
    }
  }
}

// Plane-sweep splat over planes [l0, l1): intersect the ray with each depth
// plane and touch only the lateral window whose in-plane radius is
// truncation*sigma scaled by 1/|d_z|, which guarantees every voxel with
// object-space distance below truncation*sigma is inside the window. The
// kernel always uses the exact point-to-line distance, so the only
// difference from the naive path is the truncation.
inline void splat_ray_fast(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                           const VoxelGrid& grid,
                           const std::vector<double>& inv_two_sigma_sq,
                           double rx, double ry, int l0, int l1,
                           std::vector<double>& scratch, double* values,
                           SkipCounts& skips) {
  const auto& spec = grid.spec;
  const double inv_dz = 1.0 / d.z();
  const double step_x = grid.pitch_x_unit;  // lat_x spacing per unit depth
  const double step_y = grid.pitch_y_unit;
  for (int l = l0; l < l1; ++l) {
    const double depth = grid.depth_planes[l];
    const double s = (depth - o.z()) * inv_dz;
    if (!(s > 0.0)) {
      ++skips.behind;
      continue;
    }
    const double px = o.x() + s * d.x();
    const double py = o.y() + s * d.y();
    const double cm = (px / depth - grid.lat_x[0]) / step_x;
    const double cn = (py / depth - grid.lat_y[0]) / step_y;
    // Window bounds clamped in double space before the integer casts so far
    // off-grid intersections cannot overflow.
    if (cm - rx > spec.nx - 1.0 || cm + rx < 0.0 || cn - ry > spec.ny - 1.0 ||
        cn + ry < 0.0)
      continue;
    const int m0 = static_cast<int>(std::ceil(std::max(cm - rx, 0.0)));
    const int m1 =
        static_cast<int>(std::floor(std::min(cm + rx, spec.nx - 1.0)));
    const int n0 = static_cast<int>(std::ceil(std::max(cn - ry, 0.0)));
    const int n1 =
        static_cast<int>(std::floor(std::min(cn + ry, spec.ny - 1.0)));
    if (m0 > m1 || n0 > n1) continue;
    const double coef = inv_two_sigma_sq[l];
    const double wz = depth - o.z();
    for (int n = n0; n <= n1; ++n) {
      const double wy = depth * grid.lat_y[n] - o.y();
      const double a = d.y() * wy + d.z() * wz;
      const double b = wy * wy + wz * wz;
      const int len = m1 - m0 + 1;
      for (int m = m0; m <= m1; ++m) {
        const double wx = depth * grid.lat_x[m] - o.x();
        const double dw = d.x() * wx + a;
        scratch[m - m0] = -(wx * wx + b - dw * dw) * coef;
      }
      Eigen::Map<Eigen::ArrayXd> args(scratch.data(), len);
      args = args.exp();
      double* row = values + grid.index(m0, n, l);
      for (int m = 0; m < len; ++m) row[m] += scratch[m];
    }
  }
}

// Workers own disjoint ranges of depth planes and each scans the full event
// list, so every voxel accumulates in event order no matter how many threads
// run: no merge step, and results are identical for any worker count.
template <bool Fast>
DensityField accumulate_impl(EventSpan events, const TrajectoryModel& model,
                             const CameraModel& camera, const VoxelGrid& grid,
                             const KernelSchedule& kernel, double t_r,
                             const std::vector<Eigen::Vector3d>* bearings,
                             int worker_cap) {
  if (!(kernel.sigma0 > 0.0))
    throw DomainError("accumulate: kernel sigma0 must be positive");
  if (bearings && bearings->size() != events.size())
    throw DomainError("accumulate: bearing cache size mismatch");
  DensityField field(grid);
  const int nz = grid.spec.nz;
  std::vector<double> inv_two_sigma_sq(nz);
  for (int l = 0; l < nz; ++l) {
    const double sigma = kernel.sigma_at(grid.depth_planes[l]);
    inv_two_sigma_sq[l] = 1.0 / (2.0 * sigma * sigma);
  }
  if (events.empty()) return field;
  const RigidTransform ref_inv = inverse(model.camera_pose(t_r));

  // Rays are shared across the plane workers; computing them once here also
  // keeps the per-event pose evaluation out of the inner loops.
  std::vector<Eigen::Vector3d> origins(events.size());
  std::vector<Eigen::Vector3d> directions(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    const Eigen::Vector3d f =
        bearings ? (*bearings)[i] : unproject(camera, {e.x, e.y});
    const RigidTransform t_rk = compose(ref_inv, model.camera_pose(e.t));
    origins[i] = t_rk.translation;
    directions[i] = t_rk.rotation * f;
  }

  // sigma(depth) / pitch(depth) is depth-independent for the linear
  // schedule, so the window half-width in cells is one number per ray.
  const double sigma_cells_x =
      kernel.sigma0 / (kernel.lambda0 * grid.pitch_x_unit);
  const double sigma_cells_y =
      kernel.sigma0 / (kernel.lambda0 * grid.pitch_y_unit);

  const int limit = worker_cap > 0 ? worker_cap : max_threads();
  const int workers = std::min(limit, nz);
  auto run_range = [&](int l0, int l1) {
    SkipCounts skips;
    std::vector<double> scratch(static_cast<std::size_t>(grid.spec.nx), 0.0);
    for (std::size_t i = 0; i < events.size(); ++i) {
      const Eigen::Vector3d& o = origins[i];
      const Eigen::Vector3d& d = directions[i];
      if constexpr (Fast) {
        if (std::abs(d.z()) < 1e-12) {
          skips.parallel += static_cast<std::uint64_t>(l1 - l0);
          continue;
        }
        const double abs_dz = std::abs(d.z());
        const double rx =
            kernel.truncation_radius * sigma_cells_x / abs_dz;
        const double ry =
            kernel.truncation_radius * sigma_cells_y / abs_dz;
        splat_ray_fast(o, d, grid, inv_two_sigma_sq, rx, ry, l0, l1, scratch,
                       field.values.data(), skips);
      } else {
        splat_ray_naive(o, d, grid, inv_two_sigma_sq, l0, l1, scratch,
                        field.values.data());
      }
    }
    return skips;
  };

  if (workers <= 1) {
    const SkipCounts skips = run_range(0, nz);
    field.skipped_parallel = skips.parallel;
    field.skipped_behind = skips.behind;
    return field;
  }
  std::vector<std::future<SkipCounts>> futures;
  futures.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int l0 = nz * w / workers;
    const int l1 = nz * (w + 1) / workers;
    futures.push_back(std::async(std::launch::async, run_range, l0, l1));
  }
  for (auto& f : futures) {
    const SkipCounts skips = f.get();
    field.skipped_parallel += skips.parallel;
    field.skipped_behind += skips.behind;
  }
  return field;
}

}  // namespace detail

// O(N * V) reference accumulation: every event against every voxel, no
// truncation. This is the oracle that bounds accumulate_fast.
inline DensityField accumulate_naive(
    EventSpan events, const TrajectoryModel& model, const CameraModel& camera,
    const VoxelGrid& grid, const KernelSchedule& kernel, double t_r,
    const std::vector<Eigen::Vector3d>* bearings = nullptr, int workers = 0) {
  return detail::accumulate_impl<false>(events, model, camera, grid, kernel,
                                        t_r, bearings, workers);
}

// Plane-sweep accumulation with kernel truncation; matches accumulate_naive
// up to the mass outside truncation_radius * sigma.
inline DensityField accumulate_fast(
    EventSpan events, const TrajectoryModel& model, const CameraModel& camera,
    const VoxelGrid& grid, const KernelSchedule& kernel, double t_r,
    const std::vector<Eigen::Vector3d>* bearings = nullptr, int workers = 0) {
  return detail::accumulate_impl<true>(events, model, camera, grid, kernel,
                                       t_r, bearings, workers);
}

}  // namespace vwe
