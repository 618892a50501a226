#pragma once

#include <span>

#include "vwe/common.hpp"
#include "vwe/field/iwe.hpp"
#include "vwe/field/voxel_grid.hpp"

namespace vwe {

// Population variance: mean-free second moment over all cells. Two-pass in
// index order, so the result is deterministic.
inline double variance(std::span<const double> values) {
  if (values.empty()) throw DomainError("variance: empty field");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) {
    const double d = v - mean;
    sq += d * d;
  }
  return sq / static_cast<double>(values.size());
}

inline double variance(const DensityField& field) {
  return variance(std::span<const double>(field.values));
}

inline double variance(const ImageGrid& image) {
  return variance(std::span<const double>(image.values));
}

}  // namespace vwe
