#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <vector>

#include "vwe/common.hpp"
#include "vwe/core/io.hpp"

namespace vwe {

// Clamped planar B-spline curve c(t) = sum_i N_{i,p}(t) P_i.
// With n+1 control points the knot vector has n+p+2 entries, the first and
// last knot each repeated p+1 times; the curve lives on [knots[p],
// knots[n+1]].
struct PlanarSpline {
  int degree = 3;
  std::vector<double> knots;
  std::vector<Eigen::Vector2d> control_points;

  int n_index() const { return static_cast<int>(control_points.size()) - 1; }

  std::pair<double, double> domain() const {
    return {knots[degree], knots[control_points.size()]};
  }

  void validate() const {
    const int n = n_index();
    if (degree < 1 || n < degree)
      throw DomainError("spline: need at least degree+1 control points");
    if (knots.size() != control_points.size() + degree + 1)
      throw DomainError("spline: knot count must be n + p + 2");
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (knots[i] < knots[i - 1])
        throw DomainError("spline: knots must be non-decreasing");
    for (int i = 0; i < degree; ++i) {
      if (knots[i] != knots[i + 1] ||
          knots[knots.size() - 1 - i] != knots[knots.size() - 2 - i])
        throw DomainError("spline: end knots must be clamped");
    }
    if (!(knots[degree] < knots[control_points.size()]))
      throw DomainError("spline: empty domain");
  }
};

namespace detail {

// Knot span index for parameter t (The NURBS Book A2.1).
inline int find_span(const PlanarSpline& s, double t) {
  const int p = s.degree;
  const int n = s.n_index();
  if (t >= s.knots[n + 1]) return n;
  if (t <= s.knots[p]) return p;
  int lo = p, hi = n + 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    (t < s.knots[mid]) ? hi = mid : lo = mid;
  }
  return lo;
}

// Non-vanishing basis functions N_{span-p..span, p}(t) (A2.2).
inline void basis_functions(const PlanarSpline& s, int span, double t,
                            std::vector<double>& out) {
  const int p = s.degree;
  out.assign(p + 1, 0.0);
  std::vector<double> left(p + 1), right(p + 1);
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - s.knots[span + 1 - j];
    right[j] = s.knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    out[j] = saved;
  }
}

}  // namespace detail

inline void check_in_domain(const PlanarSpline& s, double t) {
  auto [a, b] = s.domain();
  const double slack = 1e-12 * std::max(1.0, std::abs(b - a));
  if (!(t >= a - slack && t <= b + slack))
    throw DomainError("spline: parameter outside domain");
}

inline Eigen::Vector2d spline_position(const PlanarSpline& s, double t) {
  check_in_domain(s, t);
  const int span = detail::find_span(s, t);
  std::vector<double> basis;
  detail::basis_functions(s, span, t, basis);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int i = 0; i <= s.degree; ++i)
    out += basis[i] * s.control_points[span - s.degree + i];
  return out;
}

// The derivative is itself a spline of degree p-1 with control points
// p * (P_{i+1} - P_i) / (u_{i+p+1} - u_{i+1}); this builds and evaluates it,
// so velocities are exact rather than finite differences.
inline PlanarSpline derivative_spline(const PlanarSpline& s) {
  const int p = s.degree;
  const int n = s.n_index();
  if (p < 1 || n < 1) throw DomainError("spline: cannot differentiate");
  PlanarSpline d;
  d.degree = p - 1;
  d.knots.assign(s.knots.begin() + 1, s.knots.end() - 1);
  d.control_points.resize(n);
  for (int i = 0; i < n; ++i) {
    const double denom = s.knots[i + p + 1] - s.knots[i + 1];
    if (denom <= 0.0)
      throw NumericalError("spline: degenerate knot interval");
    d.control_points[i] =
        static_cast<double>(p) / denom *
        (s.control_points[i + 1] - s.control_points[i]);
  }
  return d;
}

inline Eigen::Vector2d spline_velocity(const PlanarSpline& s, double t) {
  check_in_domain(s, t);
  PlanarSpline d = derivative_spline(s);
  const int span = detail::find_span(d, t);
  std::vector<double> basis;
  detail::basis_functions(d, span, t, basis);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int i = 0; i <= d.degree; ++i)
    out += basis[i] * d.control_points[span - d.degree + i];
  return out;
}

// ---------------------------------------------------------------------------
// Spline files: header lines `degree`, `n_ctrl`, a `knots` line, then one
// control point per line.

inline PlanarSpline load_spline(const std::string& path) {
  KeyValueFile kv = load_key_value(path);
  PlanarSpline s;
  s.degree = static_cast<int>(kv.scalar("degree"));
  const int n_ctrl = static_cast<int>(kv.scalar("n_ctrl"));
  const auto* knots = kv.find("knots");
  if (!knots) throw DataError(path + ": missing knots line");
  s.knots = *knots;
  for (int i = 0; i < n_ctrl; ++i) {
    const auto* cp = kv.find("cp" + std::to_string(i));
    if (!cp || cp->size() != 2)
      throw DataError(path + ": missing control point cp" + std::to_string(i));
    s.control_points.emplace_back((*cp)[0], (*cp)[1]);
  }
  s.validate();
  return s;
}

inline void save_spline(const std::string& path, const PlanarSpline& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write spline file: " + path);
  out << "degree " << s.degree << "\n";
  out << "n_ctrl " << s.control_points.size() << "\n";
  out << "knots";
  for (double k : s.knots) out << ' ' << format_double(k);
  out << "\n";
  for (std::size_t i = 0; i < s.control_points.size(); ++i)
    out << "cp" << i << ' ' << format_double(s.control_points[i].x()) << ' '
        << format_double(s.control_points[i].y()) << "\n";
}

}  // namespace vwe
