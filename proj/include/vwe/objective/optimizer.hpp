#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "vwe/common.hpp"
#include "vwe/trajectory/bspline.hpp"

namespace vwe {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using ScalarObjectiveFn = std::function<double(double)>;

// Central finite differences, one step per coordinate.
inline Eigen::VectorXd gradient_fd(const ObjectiveFn& objective,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& step) {
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = step[i];
    probe[i] = theta[i] + h;
    const double fp = objective(probe);
    probe[i] = theta[i] - h;
    const double fm = objective(probe);
    probe[i] = theta[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericalError("gradient_fd: objective is not finite");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

struct Solve1dOptions {
  int grid_samples = 21;
  double fd_step = 1e-4;      // rad/s
  double step_tol = 1e-5;     // stop when |delta omega| falls below this
  int max_iterations = 100;
  int max_backtracks = 40;
};

struct Solve1dResult {
  double omega = 0.0;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool boundary_warning = false;  // grid maximum sat on the bracket edge
};

// Univariate contrast maximization: a coarse grid scan supplies the initial
// guess unless a warm start is given, then adaptive-step gradient ascent with
// backtracking refines it. Exact ties in the scan go to the smaller |omega|.
inline Solve1dResult solve_1d(const ScalarObjectiveFn& objective, double lo,
                              double hi, std::optional<double> init = {},
                              const Solve1dOptions& opts = {}) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("solve_1d: invalid bracket");
  Solve1dResult result;
  auto eval = [&](double w) {
    ++result.evaluations;
    const double v = objective(w);
    if (!std::isfinite(v))
      throw NumericalError("solve_1d: objective is not finite");
    return v;
  };

  double omega;
  double value;
  if (init) {
    omega = std::min(hi, std::max(lo, *init));
    value = eval(omega);
  } else {
    const int n = std::max(2, opts.grid_samples);
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    double best_omega = lo;
    for (int i = 0; i < n; ++i) {
      const double w = lo + (hi - lo) * i / (n - 1);
      const double v = eval(w);
      if (v > best_value ||
          (v == best_value && std::abs(w) < std::abs(best_omega))) {
        best = i;
        best_value = v;
        best_omega = w;
      }
    }
    if (best == 0 || best == n - 1) {
      result.boundary_warning = true;
      result.omega = best_omega;
      result.value = best_value;
      return result;
    }
    omega = best_omega;
    value = best_value;
  }

  // Ascent with a Newton step where the local curvature is concave (the
  // central-difference pair gives the curvature for free), plain gradient
  // steps elsewhere, and backtracking so the objective never decreases.
  const double max_step = (hi - lo) / 8.0;
  double fallback_step = (hi - lo) / std::max(2, opts.grid_samples);
  for (int it = 0; it < opts.max_iterations; ++it) {
    ++result.iterations;
    const double h = opts.fd_step;
    const double fp = eval(omega + h);
    const double fm = eval(omega - h);
    const double g = (fp - fm) / (2.0 * h);
    const double curv = (fp - 2.0 * value + fm) / (h * h);
    double step;
    if (curv < 0.0)
      step = -g / curv;
    else
      step = (g >= 0.0 ? 1.0 : -1.0) * fallback_step;
    step = std::min(max_step, std::max(-max_step, step));

    bool accepted = false;
    double moved = 0.0;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      const double candidate = std::min(hi, std::max(lo, omega + step));
      if (candidate == omega) break;
      const double fc = eval(candidate);
      if (fc > value) {
        moved = std::abs(candidate - omega);
        omega = candidate;
        value = fc;
        accepted = true;
        fallback_step = std::max(moved, opts.step_tol);
        break;
      }
      step *= 0.5;
      if (std::abs(step) < opts.step_tol * 0.25) break;
    }
    if (!accepted) {
      // The FD probes themselves may already be uphill.
      if (fp > value && fp >= fm) {
        omega = std::min(hi, omega + h);
        value = fp;
        moved = h;
      } else if (fm > value) {
        omega = std::max(lo, omega - h);
        value = fm;
        moved = h;
      } else {
        break;  // local maximum within the probe width
      }
    }
    if (moved < opts.step_tol) break;
  }
  result.omega = omega;
  result.value = value;
  return result;
}

struct SolveNdOptions {
  double fd_step = 1e-4;       // meters, per control-point coordinate
  double rel_gain_tol = 1e-6;  // stop when the relative objective gain drops
  int max_iterations = 50;
  int max_backtracks = 30;
  double initial_step = 0.005;  // meters, first trial step length
};

struct SolveNdResult {
  Eigen::VectorXd theta;
  double initial_value = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool backtracking_exhausted = false;
};

// Gradient ascent with a finite-difference gradient and backtracking line
// search over the free coordinates of theta (fixed coordinates keep their
// initial values). Never returns a worse objective than theta0's.
inline SolveNdResult solve_nd(const ObjectiveFn& objective,
                              const Eigen::VectorXd& theta0,
                              const std::vector<bool>& free_mask,
                              const SolveNdOptions& opts = {}) {
  if (static_cast<Eigen::Index>(free_mask.size()) != theta0.size())
    throw DomainError("solve_nd: mask size mismatch");
  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < theta0.size(); ++i)
    if (free_mask[i]) free_idx.push_back(i);

  SolveNdResult result;
  result.theta = theta0;
  result.initial_value = objective(theta0);
  result.value = result.initial_value;
  if (!std::isfinite(result.value))
    throw NumericalError("solve_nd: objective is not finite at theta0");
  if (free_idx.empty()) return result;

  double alpha = opts.initial_step;
  for (int it = 0; it < opts.max_iterations; ++it) {
    ++result.iterations;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta0.size());
    Eigen::VectorXd probe = result.theta;
    for (Eigen::Index i : free_idx) {
      probe[i] = result.theta[i] + opts.fd_step;
      const double fp = objective(probe);
      probe[i] = result.theta[i] - opts.fd_step;
      const double fm = objective(probe);
      probe[i] = result.theta[i];
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NumericalError("solve_nd: objective is not finite");
      g[i] = (fp - fm) / (2.0 * opts.fd_step);
    }
    const double gnorm = g.norm();
    if (gnorm == 0.0) break;
    const Eigen::VectorXd direction = g / gnorm;

    bool accepted = false;
    double trial = alpha;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      const Eigen::VectorXd candidate = result.theta + trial * direction;
      const double v = objective(candidate);
      if (std::isfinite(v) && v > result.value) {
        const double gain = (v - result.value) /
                            std::max(std::abs(result.value), 1e-300);
        result.theta = candidate;
        result.value = v;
        accepted = true;
        alpha = std::min(trial * 1.5, 1.0);
        if (gain < opts.rel_gain_tol) it = opts.max_iterations;  // converged
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) {
      result.backtracking_exhausted = true;
      break;
    }
    alpha = std::max(alpha, 1e-12);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Spline refinement wrapper: flattens control points into theta and applies
// the gauge fixing (first control point pinned, direction from the first to
// the second control point pinned; its length stays free through the
// parametrization below).

struct SplineGauge {
  Eigen::Vector2d p0;
  Eigen::Vector2d direction;  // unit vector from p0 to p1 at theta0
};

inline Eigen::VectorXd spline_to_theta(const PlanarSpline& s) {
  Eigen::VectorXd theta(2 * s.control_points.size());
  for (std::size_t i = 0; i < s.control_points.size(); ++i)
    theta.segment<2>(2 * i) = s.control_points[i];
  return theta;
}

inline PlanarSpline theta_to_spline(const PlanarSpline& like,
                                    const Eigen::VectorXd& theta) {
  PlanarSpline s = like;
  for (std::size_t i = 0; i < s.control_points.size(); ++i)
    s.control_points[i] = theta.segment<2>(2 * i);
  return s;
}

struct SplineSolveResult {
  PlanarSpline spline;
  double initial_value = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool backtracking_exhausted = false;
};

// Refines a spline against an objective over its control points. With no
// explicit mask the gauge is fixed by pinning control point 0 and the
// direction toward control point 1 (the chord length stays free): the
// candidate's P1 is re-projected onto the pinned direction after every step.
inline SplineSolveResult solve_nd_spline(
    const std::function<double(const PlanarSpline&)>& objective,
    const PlanarSpline& spline0,
    const std::optional<std::vector<bool>>& free_points = {},
    const SolveNdOptions& opts = {}) {
  spline0.validate();
  const std::size_t n_pts = spline0.control_points.size();
  if (n_pts < 2) throw DomainError("solve_nd_spline: need >= 2 controls");

  std::vector<bool> mask(2 * n_pts, true);
  std::optional<SplineGauge> gauge;
  if (free_points) {
    if (free_points->size() != n_pts)
      throw DomainError("solve_nd_spline: mask size mismatch");
    for (std::size_t i = 0; i < n_pts; ++i) {
      mask[2 * i] = (*free_points)[i];
      mask[2 * i + 1] = (*free_points)[i];
    }
  } else {
    mask[0] = mask[1] = false;  // pin P0
    SplineGauge g;
    g.p0 = spline0.control_points[0];
    const Eigen::Vector2d chord =
        spline0.control_points[1] - spline0.control_points[0];
    if (chord.norm() < 1e-12)
      throw DomainError("solve_nd_spline: first chord is degenerate");
    g.direction = chord.normalized();
    gauge = g;
  }

  auto project_gauge = [&](Eigen::VectorXd theta) {
    if (gauge) {
      const Eigen::Vector2d p1 = theta.segment<2>(2);
      const double len = std::max((p1 - gauge->p0).dot(gauge->direction),
                                  1e-9);
      theta.segment<2>(2) = gauge->p0 + len * gauge->direction;
    }
    return theta;
  };
  auto wrapped = [&](const Eigen::VectorXd& theta) {
    return objective(theta_to_spline(spline0, project_gauge(theta)));
  };

  const SolveNdResult r =
      solve_nd(wrapped, spline_to_theta(spline0), mask, opts);
  SplineSolveResult out;
  out.spline = theta_to_spline(spline0, project_gauge(r.theta));
  out.initial_value = r.initial_value;
  out.value = r.value;
  out.iterations = r.iterations;
  out.backtracking_exhausted = r.backtracking_exhausted;
  return out;
}

}  // namespace vwe
