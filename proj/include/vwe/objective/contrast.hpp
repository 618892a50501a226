#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vwe/core/event.hpp"
#include "vwe/field/accumulate.hpp"
#include "vwe/field/iwe.hpp"
#include "vwe/field/voxel_grid.hpp"
#include "vwe/objective/variance.hpp"
#include "vwe/trajectory/model.hpp"

namespace vwe {

// Event window of one reference volume: t in [t_r - tau2/2, t_r + tau2/2].
struct VolumeWindow {
  double t_r = 0.0;
  double half_span = 0.0;
  std::size_t first = 0;  // index range into the stream
  std::size_t last = 0;   // exclusive

  std::size_t count() const { return last - first; }

  static VolumeWindow from_stream(EventSpan events, double t_r, double tau2) {
    if (!(tau2 > 0.0)) throw DomainError("volume window: tau2 must be > 0");
    VolumeWindow w;
    w.t_r = t_r;
    w.half_span = tau2 * 0.5;
    auto [first, last] =
        time_range(events, t_r - w.half_span, t_r + w.half_span);
    w.first = first;
    w.last = last;
    for (std::size_t i = w.first; i < w.last; ++i)
      if (events[i].t < t_r - w.half_span - 1e-12 ||
          events[i].t > t_r + w.half_span + 1e-12)
        throw DataError("volume window: event range inconsistent with span");
    return w;
  }
};

struct MultiVolumeConfig {
  double tau1 = 0.2;  // reference spacing, s
  double tau2 = 0.4;  // window span, s; tau2 >= tau1 makes windows overlap
  int volumes = 1;    // M
};

struct ObjectiveReport {
  double value = 0.0;
  std::vector<double> per_volume;
  std::optional<Eigen::VectorXd> gradient;
  std::vector<int> skipped_volumes;
  int evaluations = 0;  // number of fields accumulated
};

struct ObjectiveOptions {
  std::size_t min_events = 500;
  // 0 = use every event; otherwise stride-subsample each window down to at
  // most this many events before accumulation. The subsample is a pure
  // function of the window, so objective values stay deterministic.
  std::size_t max_events_per_eval = 0;
  const std::vector<Eigen::Vector3d>* bearings = nullptr;  // full-stream cache
  int accumulate_workers = 0;  // 0 = hardware default
};

namespace detail {

inline DensityField build_window_field(EventSpan events,
                                       const TrajectoryModel& model,
                                       const CameraModel& camera,
                                       const VolumeWindow& window,
                                       const GridSpec& grid_spec,
                                       const KernelSchedule& kernel,
                                       const ObjectiveOptions& opts) {
  const VoxelGrid grid = VoxelGrid::make(camera, grid_spec);
  EventSpan span = events.subspan(window.first, window.count());
  std::vector<Event> subsampled;
  std::vector<Eigen::Vector3d> sub_bearings;
  const std::vector<Eigen::Vector3d>* bearings = nullptr;
  if (opts.max_events_per_eval > 0 &&
      span.size() > opts.max_events_per_eval) {
    const std::size_t stride =
        (span.size() + opts.max_events_per_eval - 1) /
        opts.max_events_per_eval;
    subsampled.reserve(span.size() / stride + 1);
    for (std::size_t i = 0; i < span.size(); i += stride) {
      subsampled.push_back(span[i]);
      if (opts.bearings) sub_bearings.push_back((*opts.bearings)[window.first + i]);
    }
    span = EventSpan(subsampled);
    if (opts.bearings) bearings = &sub_bearings;
  } else if (opts.bearings) {
    sub_bearings.assign(opts.bearings->begin() + window.first,
                        opts.bearings->begin() + window.last);
    bearings = &sub_bearings;
  }
  return accumulate_fast(span, model, camera, grid, kernel, window.t_r,
                         bearings, opts.accumulate_workers);
}

}  // namespace detail

// Contrast of a single volume: variance of the VWE built from the window.
inline ObjectiveReport single_volume_objective(
    EventSpan events, const TrajectoryModel& model, const CameraModel& camera,
    const VolumeWindow& window, const GridSpec& grid_spec,
    const KernelSchedule& kernel, const ObjectiveOptions& opts = {}) {
  if (window.count() < opts.min_events)
    throw InsufficientDataError(
        "single volume objective: window has " +
        std::to_string(window.count()) + " events, need " +
        std::to_string(opts.min_events));
  const DensityField field = detail::build_window_field(
      events, model, camera, window, grid_spec, kernel, opts);
  ObjectiveReport report;
  report.value = variance(field);
  report.per_volume = {report.value};
  report.evaluations = 1;
  return report;
}

inline std::vector<VolumeWindow> make_volume_windows(
    EventSpan events, const MultiVolumeConfig& config) {
  if (config.volumes < 1)
    throw DomainError("multi volume: need at least one volume");
  if (!(config.tau1 > 0.0))
    throw DomainError("multi volume: tau1 must be > 0");
  if (events.empty()) throw InsufficientDataError("multi volume: no events");
  const double t0 = events.front().t + config.tau2 * 0.5;
  std::vector<VolumeWindow> windows;
  windows.reserve(config.volumes);
  for (int i = 0; i < config.volumes; ++i)
    windows.push_back(
        VolumeWindow::from_stream(events, t0 + i * config.tau1, config.tau2));
  return windows;
}

// Global objective: sum of per-volume variances over regularly spaced
// reference views. With tau2 > tau1 neighbouring windows share events, which
// is what couples scale across the trajectory. Volumes evaluate in parallel;
// the sum is taken in volume order.
inline ObjectiveReport multi_volume_objective(
    EventSpan events, const TrajectoryModel& model, const CameraModel& camera,
    const std::vector<VolumeWindow>& windows, const GridSpec& grid_spec,
    const KernelSchedule& kernel, const ObjectiveOptions& opts = {}) {
  if (windows.empty()) throw DomainError("multi volume: no windows");
  ObjectiveReport report;
  report.per_volume.assign(windows.size(), 0.0);
  std::vector<char> skipped(windows.size(), 0);
  // Volumes run concurrently, so each accumulation stays single-threaded.
  ObjectiveOptions volume_opts = opts;
  volume_opts.accumulate_workers = 1;
  auto make = [&](std::size_t i) -> double {
    if (windows[i].count() < opts.min_events) return -1.0;
    const DensityField field = detail::build_window_field(
        events, model, camera, windows[i], grid_spec, kernel, volume_opts);
    return variance(field);
  };
  auto consume = [&](std::size_t i, double value) {
    if (value < 0.0) {
      skipped[i] = 1;
      return;
    }
    report.per_volume[i] = value;
    report.value += value;
    ++report.evaluations;
  };
  ordered_parallel(windows.size(), make, consume);
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (skipped[i]) report.skipped_volumes.push_back(static_cast<int>(i));
  if (report.evaluations == 0)
    throw InsufficientDataError("multi volume: every window was skipped");
  return report;
}

inline ObjectiveReport multi_volume_objective(
    EventSpan events, const TrajectoryModel& model, const CameraModel& camera,
    const MultiVolumeConfig& config, const GridSpec& grid_spec,
    const KernelSchedule& kernel, const ObjectiveOptions& opts = {}) {
  return multi_volume_objective(events, model, camera,
                                make_volume_windows(events, config), grid_spec,
                                kernel, opts);
}

}  // namespace vwe
