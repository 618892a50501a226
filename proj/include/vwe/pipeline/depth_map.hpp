#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "vwe/field/accumulate.hpp"
#include "vwe/objective/variance.hpp"

namespace vwe {

// Semi-dense depth over the lateral cells of a reference volume: per column
// of the density field, the depth-plane argmax, kept when the peak clears an
// adaptive threshold. Confidence is the peak density itself.
struct DepthMap {
  int nx = 0;
  int ny = 0;
  double t_ref = 0.0;
  std::vector<double> depth;       // meters; <= 0 marks invalid
  std::vector<double> confidence;  // peak ray density
  VoxelGrid grid;

  bool valid(int m, int n) const { return depth[idx(m, n)] > 0.0; }
  std::size_t idx(int m, int n) const {
    return static_cast<std::size_t>(n) * nx + m;
  }
};

struct DepthMapConfig {
  double k_sigma = 3.0;  // threshold = mean + k_sigma * std of the field
};

inline DepthMap extract_depth_map(const DensityField& field, double t_ref,
                                  const DepthMapConfig& config = {}) {
  const auto& spec = field.grid.spec;
  if (field.values.empty()) throw DomainError("depth map: empty field");
  const double mean =
      Eigen::Map<const Eigen::ArrayXd>(field.values.data(),
                                       field.values.size())
          .mean();
  const double stddev = std::sqrt(variance(field));
  const double threshold = mean + config.k_sigma * stddev;

  DepthMap map;
  map.nx = spec.nx;
  map.ny = spec.ny;
  map.t_ref = t_ref;
  map.grid = field.grid;
  map.depth.assign(static_cast<std::size_t>(spec.nx) * spec.ny, -1.0);
  map.confidence.assign(map.depth.size(), 0.0);
  for (int n = 0; n < spec.ny; ++n) {
    for (int m = 0; m < spec.nx; ++m) {
      double best = -1.0;
      int best_l = -1;
      for (int l = 0; l < spec.nz; ++l) {
        const double v = field.value(m, n, l);
        if (v > best) {
          best = v;
          best_l = l;
        }
      }
      map.confidence[map.idx(m, n)] = best;
      if (best > threshold)
        map.depth[map.idx(m, n)] = field.grid.depth_planes[best_l];
    }
  }
  return map;
}

inline DepthMap extract_depth_map(EventSpan events,
                                  const TrajectoryModel& model,
                                  const CameraModel& camera, double t_ref,
                                  const GridSpec& grid_spec,
                                  const KernelSchedule& kernel,
                                  const DepthMapConfig& config = {}) {
  const VoxelGrid grid =
      VoxelGrid::make(camera, grid_spec, model.camera_pose(t_ref));
  const DensityField field =
      accumulate_fast(events, model, camera, grid, kernel, t_ref);
  return extract_depth_map(field, t_ref, config);
}

// float32 binary (row-major, invalid cells as -1) plus a text sidecar.
inline void save_depth_map(const std::string& bin_path,
                           const std::string& sidecar_path,
                           const DepthMap& map) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot write depth map: " + bin_path);
  std::vector<float> buf(map.depth.size());
  for (std::size_t i = 0; i < buf.size(); ++i)
    buf[i] = static_cast<float>(map.depth[i]);
  bin.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  std::ofstream side(sidecar_path);
  if (!side) throw DataError("cannot write sidecar: " + sidecar_path);
  side << "nx " << map.nx << "\n";
  side << "ny " << map.ny << "\n";
  side << "t_ref " << format_double(map.t_ref) << "\n";
  side << "invalid -1\n";
  side << "dtype float32\n";
}

// ASCII `x y z` point cloud in world coordinates.
inline void save_point_cloud(const std::string& path, const DepthMap& map) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write point cloud: " + path);
  for (int n = 0; n < map.ny; ++n) {
    for (int m = 0; m < map.nx; ++m) {
      if (!map.valid(m, n)) continue;
      const double depth = map.depth[map.idx(m, n)];
      const Eigen::Vector3d local(depth * map.grid.lat_x[m],
                                  depth * map.grid.lat_y[n], depth);
      const Eigen::Vector3d world = map.grid.ref_pose.apply(local);
      out << format_double(world.x()) << ' ' << format_double(world.y())
          << ' ' << format_double(world.z()) << '\n';
    }
  }
}

}  // namespace vwe
