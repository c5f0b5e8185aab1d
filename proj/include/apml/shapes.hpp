#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "apml/point_set.hpp"

namespace apml {

enum class Shape {
  Sphere,           ///< uniform on the unit sphere surface
  Cube,             ///< uniform in [0, 1]^3
  TwoClusters,      ///< two Gaussian blobs (sigma 0.05) at (+-0.5, 0, 0)
  DensityImbalance, ///< 90% in the octant [0, 0.5]^3, 10% in the rest of the cube
};

std::optional<Shape> parse_shape(const std::string &name);
std::string shape_name(Shape shape);

/// Deterministic for a fixed (shape, n_points, seed).
PointSet<double> generate_shape(Shape shape, Index n_points,
                                std::uint64_t seed);

/// Uniform samples inside the axis-aligned bounding box of `reference`.
PointSet<double> uniform_in_bounds(const PointSet<double> &reference,
                                   Index n_points, std::uint64_t seed);

} // namespace apml
