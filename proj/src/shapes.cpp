#include "apml/shapes.hpp"

#include <random>

namespace apml {

namespace {

constexpr double kClusterSigma = 0.05;
constexpr double kClusterOffset = 0.5;
constexpr double kDenseShare = 0.9;
constexpr double kOctantEdge = 0.5;

Eigen::Vector3d uniform_cube(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng), y = u(rng), z = u(rng);
  return {x, y, z};
}

} // namespace

std::optional<Shape> parse_shape(const std::string &name) {
  if (name == "sphere")
    return Shape::Sphere;
  if (name == "cube")
    return Shape::Cube;
  if (name == "two-clusters" || name == "twoclusters")
    return Shape::TwoClusters;
  if (name == "density-imbalance" || name == "densityimbalance")
    return Shape::DensityImbalance;
  return std::nullopt;
}

std::string shape_name(Shape shape) {
  switch (shape) {
  case Shape::Sphere:
    return "sphere";
  case Shape::Cube:
    return "cube";
  case Shape::TwoClusters:
    return "two-clusters";
  case Shape::DensityImbalance:
    return "density-imbalance";
  }
  return "unknown";
}

PointSet<double> generate_shape(Shape shape, Index n_points,
                                std::uint64_t seed) {
  if (n_points < 2)
    throw InvalidArgument("shape generation needs at least 2 points");
  std::mt19937_64 rng(seed);
  Matrix<double> pts(n_points, 3);

  switch (shape) {
  case Shape::Sphere: {
    std::normal_distribution<double> g(0.0, 1.0);
    for (Index i = 0; i < n_points; ++i) {
      Eigen::Vector3d v;
      do {
        const double x = g(rng), y = g(rng), z = g(rng);
        v = {x, y, z};
      } while (v.norm() < 1e-12);
      pts.row(i) = v.normalized().transpose();
    }
    break;
  }
  case Shape::Cube:
    for (Index i = 0; i < n_points; ++i)
      pts.row(i) = uniform_cube(rng).transpose();
    break;
  case Shape::TwoClusters: {
    std::normal_distribution<double> g(0.0, kClusterSigma);
    const Index first = n_points / 2;
    for (Index i = 0; i < n_points; ++i) {
      const double cx = i < first ? -kClusterOffset : kClusterOffset;
      const double x = g(rng), y = g(rng), z = g(rng);
      pts.row(i) << cx + x, y, z;
    }
    break;
  }
  case Shape::DensityImbalance: {
    const auto dense = static_cast<Index>(
        std::llround(kDenseShare * static_cast<double>(n_points)));
    for (Index i = 0; i < n_points; ++i) {
      Eigen::Vector3d v = uniform_cube(rng);
      if (i < dense) {
        v *= kOctantEdge;
      } else {
        while ((v.array() < kOctantEdge).all())
          v = uniform_cube(rng);
      }
      pts.row(i) = v.transpose();
    }
    break;
  }
  }
  return PointSet<double>(std::move(pts));
}

PointSet<double> uniform_in_bounds(const PointSet<double> &reference,
                                   Index n_points, std::uint64_t seed) {
  if (n_points < 1)
    throw InvalidArgument("need at least one point");
  const RowVector<double> lo = reference.points().colwise().minCoeff();
  const RowVector<double> hi = reference.points().colwise().maxCoeff();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix<double> pts(n_points, reference.dim());
  for (Index i = 0; i < n_points; ++i)
    for (Index k = 0; k < reference.dim(); ++k)
      pts(i, k) = lo(k) + (hi(k) - lo(k)) * u(rng);
  return PointSet<double>(std::move(pts));
}

} // namespace apml
