#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <vector>

#include "vwe/core/io.hpp"

namespace vwe {

// 3D edge scene: the world is a set of line segments that trigger events.
struct SyntheticScene {
  struct Segment {
    Eigen::Vector3d a;
    Eigen::Vector3d b;
  };
  std::vector<Segment> segments;
  double points_per_meter = 60.0;

  void validate() const {
    if (segments.empty()) throw DomainError("scene: no segments");
    for (const Segment& s : segments)
      if ((s.b - s.a).norm() <= 0.0)
        throw DomainError("scene: zero-length segment");
    if (!(points_per_meter > 0.0))
      throw DomainError("scene: points_per_meter must be positive");
  }

  // Deterministic discretization of all edges, endpoints included.
  std::vector<Eigen::Vector3d> sample_points() const {
    std::vector<Eigen::Vector3d> pts;
    for (const Segment& s : segments) {
      const double len = (s.b - s.a).norm();
      const int count =
          std::max(2, static_cast<int>(std::ceil(len * points_per_meter)) + 1);
      for (int i = 0; i < count; ++i) {
        const double u = static_cast<double>(i) / (count - 1);
        pts.push_back(s.a + u * (s.b - s.a));
      }
    }
    return pts;
  }
};

inline SyntheticScene load_scene(const std::string& path,
                                 double points_per_meter = 60.0) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scene file: " + path);
  SyntheticScene scene;
  scene.points_per_meter = points_per_meter;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    auto toks = detail::split_ws(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (toks.size() != 6)
      throw DataError(where + ": expected `x1 y1 z1 x2 y2 z2`");
    double v[6];
    for (int i = 0; i < 6; ++i) v[i] = detail::parse_double(toks[i], where);
    scene.segments.push_back({Eigen::Vector3d(v[0], v[1], v[2]),
                              Eigen::Vector3d(v[3], v[4], v[5])});
  }
  scene.validate();
  return scene;
}

inline void save_scene(const std::string& path, const SyntheticScene& scene) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write scene file: " + path);
  out << "# x1 y1 z1 x2 y2 z2\n";
  for (const auto& s : scene.segments) {
    out << format_double(s.a.x()) << ' ' << format_double(s.a.y()) << ' '
        << format_double(s.a.z()) << ' ' << format_double(s.b.x()) << ' '
        << format_double(s.b.y()) << ' ' << format_double(s.b.z()) << '\n';
  }
}

}  // namespace vwe
