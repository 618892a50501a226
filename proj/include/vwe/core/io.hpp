#pragma once

#include <Eigen/Geometry>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vwe/core/camera.hpp"
#include "vwe/core/event.hpp"
#include "vwe/core/transform.hpp"

namespace vwe {

// All text outputs print doubles with 17 significant digits so every file
// round-trips through its loader bit-exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": cannot parse number '" + tok + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Event files: one event per line, `t x y p`, '#' starts a comment.

inline std::vector<Event> load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open event file: " + path);
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    auto toks = detail::split_ws(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (toks.size() != 4) throw DataError(where + ": expected `t x y p`");
    Event e;
    e.t = detail::parse_double(toks[0], where);
    e.x = detail::parse_double(toks[1], where);
    e.y = detail::parse_double(toks[2], where);
    const double p = detail::parse_double(toks[3], where);
    if (p != 1.0 && p != -1.0)
      throw DataError(where + ": polarity must be +1 or -1");
    e.polarity = p > 0 ? 1 : -1;
    if (!std::isfinite(e.t) || !std::isfinite(e.x) || !std::isfinite(e.y))
      throw DataError(where + ": non-finite event");
    if (!events.empty() && e.t < events.back().t)
      throw DataError(where + ": timestamps out of order");
    events.push_back(e);
  }
  return events;
}

inline void save_events(const std::string& path, EventSpan events) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write event file: " + path);
  out << "# t x y p\n";
  for (const Event& e : events)
    out << format_double(e.t) << ' ' << format_double(e.x) << ' '
        << format_double(e.y) << ' ' << e.polarity << '\n';
}

// ---------------------------------------------------------------------------
// Flat key-value files: `key v0 v1 ...` per line, '#' comments.

struct KeyValueFile {
  std::vector<std::pair<std::string, std::vector<double>>> entries;

  const std::vector<double>* find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }

  double scalar(const std::string& key) const {
    const auto* v = find(key);
    if (!v || v->size() != 1) throw DataError("missing scalar key: " + key);
    return (*v)[0];
  }

  double scalar_or(const std::string& key, double fallback) const {
    const auto* v = find(key);
    return (v && v->size() == 1) ? (*v)[0] : fallback;
  }
};

inline KeyValueFile load_key_value(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  KeyValueFile kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    auto toks = detail::split_ws(line);
    if (toks.size() < 2)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected `key value...`");
    std::vector<double> vals;
    for (std::size_t i = 1; i < toks.size(); ++i)
      vals.push_back(detail::parse_double(
          toks[i], path + ":" + std::to_string(line_no)));
    kv.entries.emplace_back(toks[0], std::move(vals));
  }
  return kv;
}

// ---------------------------------------------------------------------------
// Calibration files: intrinsics, distortion, and vehicle-camera extrinsics.

struct Extrinsics {
  Eigen::Matrix3d R_vc = Eigen::Matrix3d::Identity();  // camera-to-vehicle
  Eigen::Vector3d t_vc = Eigen::Vector3d::Zero();

  RigidTransform camera_to_vehicle() const { return {R_vc, t_vc}; }

  // Forward-facing mount: camera optical axis along the vehicle heading (+y),
  // image u along vehicle x, image v pointing down (-z).
  static Extrinsics forward_facing() {
    Extrinsics e;
    e.R_vc << 1, 0, 0, 0, 0, 1, 0, -1, 0;
    return e;
  }
};

struct Calibration {
  CameraModel camera;
  Extrinsics extrinsics;
};

inline Calibration load_calibration(const std::string& path) {
  KeyValueFile kv = load_key_value(path);
  Calibration c;
  c.camera.fx = kv.scalar("fx");
  c.camera.fy = kv.scalar("fy");
  c.camera.cx = kv.scalar("cx");
  c.camera.cy = kv.scalar("cy");
  c.camera.width = static_cast<int>(kv.scalar("width"));
  c.camera.height = static_cast<int>(kv.scalar("height"));
  if (c.camera.fx <= 0.0 || c.camera.fy <= 0.0)
    throw DataError(path + ": focal lengths must be positive");
  for (int i = 0; i < 5; ++i)
    c.camera.distortion[i] = kv.scalar_or("dist" + std::to_string(i), 0.0);
  if (const auto* r = kv.find("Rvc")) {
    if (r->size() != 9) throw DataError(path + ": Rvc needs 9 values");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c.extrinsics.R_vc(i, j) = (*r)[3 * i + j];
    if (orthonormality_error(c.extrinsics.R_vc) > 1e-6)
      throw DataError(path + ": Rvc is not a rotation");
  } else {
    c.extrinsics = Extrinsics::forward_facing();
  }
  if (const auto* t = kv.find("tvc")) {
    if (t->size() != 3) throw DataError(path + ": tvc needs 3 values");
    c.extrinsics.t_vc = Eigen::Vector3d((*t)[0], (*t)[1], (*t)[2]);
  }
  return c;
}

inline void save_calibration(const std::string& path, const Calibration& c) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write calibration: " + path);
  out << "fx " << format_double(c.camera.fx) << "\n";
  out << "fy " << format_double(c.camera.fy) << "\n";
  out << "cx " << format_double(c.camera.cx) << "\n";
  out << "cy " << format_double(c.camera.cy) << "\n";
  out << "width " << c.camera.width << "\n";
  out << "height " << c.camera.height << "\n";
  for (int i = 0; i < 5; ++i)
    out << "dist" << i << ' ' << format_double(c.camera.distortion[i]) << "\n";
  out << "Rvc";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out << ' ' << format_double(c.extrinsics.R_vc(i, j));
  out << "\ntvc";
  for (int i = 0; i < 3; ++i)
    out << ' ' << format_double(c.extrinsics.t_vc[i]);
  out << "\n";
}

// ---------------------------------------------------------------------------
// Trajectory files, TUM style: `t tx ty tz qx qy qz qw` per line.

inline std::vector<PoseSample> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trajectory file: " + path);
  std::vector<PoseSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    auto toks = detail::split_ws(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (toks.size() != 8)
      throw DataError(where + ": expected `t tx ty tz qx qy qz qw`");
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = detail::parse_double(toks[i], where);
    PoseSample s;
    s.t = v[0];
    s.pose.translation = Eigen::Vector3d(v[1], v[2], v[3]);
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (q.norm() < 1e-12) throw DataError(where + ": zero quaternion");
    q.normalize();
    s.pose.rotation = q.toRotationMatrix();
    if (!samples.empty() && s.t < samples.back().t)
      throw DataError(where + ": timestamps out of order");
    samples.push_back(s);
  }
  return samples;
}

inline void save_trajectory(const std::string& path,
                            const std::vector<PoseSample>& samples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trajectory file: " + path);
  out << "# t tx ty tz qx qy qz qw\n";
  for (const PoseSample& s : samples) {
    Eigen::Quaterniond q(s.pose.rotation);
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    out << format_double(s.t) << ' ' << format_double(s.pose.translation.x())
        << ' ' << format_double(s.pose.translation.y()) << ' '
        << format_double(s.pose.translation.z()) << ' '
        << format_double(q.x()) << ' ' << format_double(q.y()) << ' '
        << format_double(q.z()) << ' ' << format_double(q.w()) << '\n';
  }
}

}  // namespace vwe
