#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "vwe/core/transform.hpp"
#include "vwe/trajectory/bspline.hpp"

namespace vwe {

struct SplineFit {
  PlanarSpline spline;
  double residual_rms = 0.0;
  double residual_max = 0.0;
};

namespace detail {

// Chord-length parameters of the sample positions, affinely mapped onto the
// sample time range so the fitted curve is evaluated directly in time. For
// constant-speed data (the front end fixes v) the two parametrizations
// coincide. A degenerate chord (stationary samples) falls back to time.
inline std::vector<double> chord_parameters(
    const std::vector<double>& times,
    const std::vector<Eigen::Vector2d>& points) {
  const std::size_t m = points.size();
  std::vector<double> u(m, 0.0);
  double total = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    total += (points[k] - points[k - 1]).norm();
    u[k] = total;
  }
  const double t0 = times.front();
  const double t1 = times.back();
  if (total <= 1e-12 * m) {
    for (std::size_t k = 0; k < m; ++k) u[k] = times[k];
    return u;
  }
  for (std::size_t k = 0; k < m; ++k)
    u[k] = t0 + (t1 - t0) * (u[k] / total);
  return u;
}

}  // namespace detail

// Least-squares approximation of planar pose samples by a clamped B-spline
// (The NURBS Book, 9.4.1): chord-length parameters, averaged interior knots
// per (9.68)/(9.69), end control points pinned to the end samples, interior
// control points from the normal equations. `num_ctrl` counts control points;
// num_ctrl == sample count turns the system square and reproduces the data.
inline SplineFit fit_spline(const std::vector<PoseSample>& samples, int degree,
                            int num_ctrl) {
  const int m = static_cast<int>(samples.size()) - 1;  // highest sample index
  const int n = num_ctrl - 1;                          // highest control index
  const int p = degree;
  if (p < 2) throw DomainError("fit_spline: degree must be >= 2");
  if (n < p) throw DomainError("fit_spline: need at least degree+1 controls");
  if (m < n) throw DomainError("fit_spline: need more samples than controls");
  if (!(samples.back().t > samples.front().t))
    throw DomainError("fit_spline: samples must span a time range");

  std::vector<double> times(m + 1);
  std::vector<Eigen::Vector2d> q(m + 1);
  for (int k = 0; k <= m; ++k) {
    times[k] = samples[k].t;
    q[k] = samples[k].pose.translation.head<2>();
  }
  const std::vector<double> ubar = detail::chord_parameters(times, q);

  PlanarSpline s;
  s.degree = p;
  s.control_points.assign(n + 1, Eigen::Vector2d::Zero());
  s.knots.assign(n + p + 2, 0.0);
  for (int i = 0; i <= p; ++i) {
    s.knots[i] = ubar.front();
    s.knots[n + 1 + i] = ubar.back();
  }
  const double d = static_cast<double>(m + 1) / static_cast<double>(n - p + 1);
  for (int j = 1; j <= n - p; ++j) {
    const int i = static_cast<int>(j * d);
    const double alpha = j * d - i;
    s.knots[p + j] = (1.0 - alpha) * ubar[i - 1] + alpha * ubar[i];
  }

  s.control_points.front() = q.front();
  s.control_points.back() = q.back();

  if (n >= 2) {
    // Rows k = 1..m-1 over the interior controls; the end-control terms move
    // to the right-hand side.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m - 1, n - 1);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m - 1, 2);
    std::vector<double> basis;
    for (int k = 1; k <= m - 1; ++k) {
      const int span = detail::find_span(s, ubar[k]);
      detail::basis_functions(s, span, ubar[k], basis);
      Eigen::Vector2d r = q[k];
      for (int j = 0; j <= p; ++j) {
        const int idx = span - p + j;
        if (idx == 0)
          r -= basis[j] * q.front();
        else if (idx == n)
          r -= basis[j] * q.back();
        else
          a(k - 1, idx - 1) = basis[j];
      }
      rhs.row(k - 1) = r.transpose();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < n - 1)
      throw NumericalError("fit_spline: rank-deficient normal equations");
    Eigen::MatrixXd sol = qr.solve(rhs);
    for (int i = 1; i <= n - 1; ++i)
      s.control_points[i] = sol.row(i - 1).transpose();
  }
  s.validate();

  SplineFit fit;
  fit.spline = std::move(s);
  double sq = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double r = (spline_position(fit.spline, ubar[k]) - q[k]).norm();
    sq += r * r;
    fit.residual_max = std::max(fit.residual_max, r);
  }
  fit.residual_rms = std::sqrt(sq / (m + 1));
  return fit;
}

}  // namespace vwe
