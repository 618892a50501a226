#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "vwe/core/camera.hpp"
#include "vwe/core/io.hpp"
#include "vwe/core/transform.hpp"

namespace vwe {

struct GridSpec {
  int nx = 64;
  int ny = 48;
  int nz = 32;
  double z_min = 0.5;   // meters
  double z_max = 10.0;  // meters
};

// Projective sampling grid in the reference camera frame. Depth planes are
// spaced uniformly in inverse depth so each slice advances constant image
// parallax; lateral voxel centres back-project the pixel lattice onto each
// plane. Voxel centres are a pure function of the indices.
struct VoxelGrid {
  GridSpec spec;
  RigidTransform ref_pose;          // reference camera-to-world
  std::vector<double> depth_planes; // strictly increasing
  std::vector<double> lat_x;        // normalized x per lateral column
  std::vector<double> lat_y;        // normalized y per lateral row
  double pitch_x_unit = 0.0;        // lateral spacing per unit depth
  double pitch_y_unit = 0.0;

  static VoxelGrid make(const CameraModel& camera, const GridSpec& spec,
                        const RigidTransform& ref_pose = {}) {
    if (!(spec.z_min > 0.0) || !(spec.z_max > spec.z_min))
      throw DomainError("voxel grid: need 0 < z_min < z_max");
    if (spec.nx < 1 || spec.ny < 1 || spec.nz < 2)
      throw DomainError("voxel grid: need nx,ny >= 1 and nz >= 2");
    VoxelGrid g;
    g.spec = spec;
    g.ref_pose = ref_pose;
    const double inv_min = 1.0 / spec.z_max;
    const double inv_max = 1.0 / spec.z_min;
    g.depth_planes.resize(spec.nz);
    for (int l = 0; l < spec.nz; ++l) {
      const double inv =
          inv_max + (inv_min - inv_max) * static_cast<double>(l) /
                        static_cast<double>(spec.nz - 1);
      g.depth_planes[l] = 1.0 / inv;
    }
    g.lat_x.resize(spec.nx);
    for (int m = 0; m < spec.nx; ++m) {
      const double u = (m + 0.5) * camera.width / spec.nx;
      g.lat_x[m] = (u - camera.cx) / camera.fx;
    }
    g.lat_y.resize(spec.ny);
    for (int n = 0; n < spec.ny; ++n) {
      const double v = (n + 0.5) * camera.height / spec.ny;
      g.lat_y[n] = (v - camera.cy) / camera.fy;
    }
    g.pitch_x_unit = camera.width / (static_cast<double>(spec.nx) * camera.fx);
    g.pitch_y_unit =
        camera.height / (static_cast<double>(spec.ny) * camera.fy);
    return g;
  }

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(spec.nx) * spec.ny * spec.nz;
  }

  // z-major layout: slice l, then row n, then column m.
  std::size_t index(int m, int n, int l) const {
    return (static_cast<std::size_t>(l) * spec.ny + n) * spec.nx + m;
  }

  Eigen::Vector3d voxel_center(int m, int n, int l) const {
    const double depth = depth_planes[l];
    return {depth * lat_x[m], depth * lat_y[n], depth};
  }

  // Continuous lateral cell coordinates of an in-plane point at depth z;
  // cell m covers [m-0.5, m+0.5].
  Eigen::Vector2d lateral_cell(const Eigen::Vector3d& p) const {
    const double step_x = lat_x.size() > 1 ? lat_x[1] - lat_x[0]
                                           : pitch_x_unit;
    const double step_y = lat_y.size() > 1 ? lat_y[1] - lat_y[0]
                                           : pitch_y_unit;
    return {(p.x() / p.z() - lat_x[0]) / step_x,
            (p.y() / p.z() - lat_y[0]) / step_y};
  }

  double plane_spacing_at(int l) const {
    if (l + 1 < spec.nz) return depth_planes[l + 1] - depth_planes[l];
    return depth_planes[l] - depth_planes[l - 1];
  }
};

// Gaussian kernel width as a function of voxel depth: sigma(depth) =
// sigma0 * depth / lambda0. Linear growth matches the footprint of a
// projective voxel, so the splat window stays a fixed number of cells.
struct KernelSchedule {
  double sigma0 = 0.01;          // meters at lambda0
  double lambda0 = 0.5;          // meters
  double truncation_radius = 3.0; // in units of sigma

  double sigma_at(double depth) const { return sigma0 * depth / lambda0; }

  // sigma0 = factor * lateral pitch at the nearest depth plane.
  static KernelSchedule proportional(const VoxelGrid& grid, double factor,
                                     double truncation = 3.0) {
    KernelSchedule k;
    k.lambda0 = grid.depth_planes.front();
    k.sigma0 = factor * grid.pitch_x_unit * k.lambda0;
    k.truncation_radius = truncation;
    return k;
  }
};

// Accumulated ray density over a voxel grid.
struct DensityField {
  VoxelGrid grid;
  std::vector<double> values;  // z-major, non-negative
  std::uint64_t skipped_parallel = 0;  // ray parallel to a depth plane
  std::uint64_t skipped_behind = 0;    // intersection behind the ray origin

  explicit DensityField(VoxelGrid g)
      : grid(std::move(g)), values(grid.voxel_count(), 0.0) {}

  double value(int m, int n, int l) const {
    return values[grid.index(m, n, l)];
  }
};

// Flat float32 binary in z-major slice order plus a text sidecar with the
// grid geometry.
inline void save_density_field(const std::string& bin_path,
                               const std::string& sidecar_path,
                               const DensityField& field) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot write field: " + bin_path);
  std::vector<float> buf(field.values.size());
  for (std::size_t i = 0; i < buf.size(); ++i)
    buf[i] = static_cast<float>(field.values[i]);
  bin.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));

  std::ofstream side(sidecar_path);
  if (!side) throw DataError("cannot write sidecar: " + sidecar_path);
  side << "nx " << field.grid.spec.nx << "\n";
  side << "ny " << field.grid.spec.ny << "\n";
  side << "nz " << field.grid.spec.nz << "\n";
  side << "z_min " << format_double(field.grid.spec.z_min) << "\n";
  side << "z_max " << format_double(field.grid.spec.z_max) << "\n";
  side << "order z-major-slices\n";
  side << "dtype float32\n";
}

// One 8-bit PGM per depth slice, normalized by the global maximum.
inline void save_density_slices(const std::string& prefix,
                                const DensityField& field) {
  double vmax = 0.0;
  for (double v : field.values) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;
  const auto& spec = field.grid.spec;
  for (int l = 0; l < spec.nz; ++l) {
    std::ofstream out(prefix + "_slice" + std::to_string(l) + ".pgm");
    if (!out) throw DataError("cannot write slice image: " + prefix);
    out << "P2\n" << spec.nx << ' ' << spec.ny << "\n255\n";
    for (int n = 0; n < spec.ny; ++n) {
      for (int m = 0; m < spec.nx; ++m) {
        const int g =
            static_cast<int>(255.0 * field.value(m, n, l) / vmax + 0.5);
        out << g << (m + 1 == spec.nx ? '\n' : ' ');
      }
    }
  }
}

}  // namespace vwe
