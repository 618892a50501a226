#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "vwe/common.hpp"

namespace vwe {

// 2D baseline: image of warped events, one Gaussian splat per warped point
// evaluated at the pixel centres.
struct ImageGrid {
  int width = 0;
  int height = 0;
  double sigma_px = 1.0;
  double truncation_radius = 3.0;  // in units of sigma_px
  std::vector<double> values;

  ImageGrid(int w, int h, double sigma, double truncation = 3.0)
      : width(w), height(h), sigma_px(sigma), truncation_radius(truncation),
        values(static_cast<std::size_t>(w) * h, 0.0) {
    if (w < 1 || h < 1) throw DomainError("image grid: empty");
    if (!(sigma > 0.0)) throw DomainError("image grid: sigma must be > 0");
  }

  double value(int i, int j) const {
    return values[static_cast<std::size_t>(j) * width + i];
  }
};

inline void accumulate_iwe(std::span<const Eigen::Vector2d> warped_pixels,
                           ImageGrid& image) {
  const double r = image.truncation_radius * image.sigma_px;
  const double coef = 1.0 / (2.0 * image.sigma_px * image.sigma_px);
  for (const Eigen::Vector2d& p : warped_pixels) {
    if (!p.allFinite()) throw DomainError("iwe: non-finite warped pixel");
    if (p.x() - r > image.width - 1.0 || p.x() + r < 0.0 ||
        p.y() - r > image.height - 1.0 || p.y() + r < 0.0)
      continue;
    const int i0 = static_cast<int>(std::ceil(std::max(p.x() - r, 0.0)));
    const int i1 =
        static_cast<int>(std::floor(std::min(p.x() + r, image.width - 1.0)));
    const int j0 = static_cast<int>(std::ceil(std::max(p.y() - r, 0.0)));
    const int j1 =
        static_cast<int>(std::floor(std::min(p.y() + r, image.height - 1.0)));
    for (int j = j0; j <= j1; ++j) {
      double* row = image.values.data() + static_cast<std::size_t>(j) *
                                              image.width;
      for (int i = i0; i <= i1; ++i) {
        const double dx = i - p.x();
        const double dy = j - p.y();
        row[i] += std::exp(-(dx * dx + dy * dy) * coef);
      }
    }
  }
}

}  // namespace vwe
