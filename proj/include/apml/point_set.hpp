#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "apml/error.hpp"

namespace apml {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

/// An unordered cloud of n points in d dimensions, stored as an n x d matrix
/// (one point per row). Construction enforces n >= 1, d >= 1 and finite
/// coordinates, so every PointSet in circulation is valid.
template <typename Scalar> class PointSet {
public:
  using scalar_type = Scalar;
  using matrix_type = Matrix<Scalar>;

  explicit PointSet(matrix_type points) : points_(std::move(points)) {
    if (points_.rows() < 1 || points_.cols() < 1)
      throw EmptyInput("point set must have at least one point and one dimension");
    if (!points_.allFinite())
      throw NonFiniteInput("point set contains NaN or Inf coordinates");
  }

  /// Row-wise literal, convenient for small fixtures.
  PointSet(std::initializer_list<std::initializer_list<Scalar>> rows)
      : PointSet(from_rows(rows)) {}

  const matrix_type &points() const noexcept { return points_; }
  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }

  auto point(Index i) const { return points_.row(i); }

  template <typename Other> PointSet<Other> cast() const {
    return PointSet<Other>(points_.template cast<Other>());
  }

  friend bool operator==(const PointSet &a, const PointSet &b) {
    return a.points_.rows() == b.points_.rows() &&
           a.points_.cols() == b.points_.cols() && a.points_ == b.points_;
  }

private:
  static matrix_type
  from_rows(std::initializer_list<std::initializer_list<Scalar>> rows) {
    const Index n = static_cast<Index>(rows.size());
    const Index d = n > 0 ? static_cast<Index>(rows.begin()->size()) : 0;
    matrix_type m(n, d);
    Index i = 0;
    for (const auto &row : rows) {
      if (static_cast<Index>(row.size()) != d)
        throw DimensionMismatch("ragged point literal");
      Index j = 0;
      for (Scalar v : row)
        m(i, j++) = v;
      ++i;
    }
    return m;
  }

  matrix_type points_;
};

/// Ragged batch: cardinalities may differ, dimension may not.
template <typename Scalar> class PointSetBatch {
public:
  explicit PointSetBatch(std::vector<PointSet<Scalar>> sets)
      : sets_(std::move(sets)) {
    if (sets_.empty())
      throw EmptyInput("batch must contain at least one point set");
    for (const auto &s : sets_)
      if (s.dim() != sets_.front().dim())
        throw DimensionMismatch("all point sets in a batch must share d");
  }

  PointSetBatch(PointSet<Scalar> single)
      : PointSetBatch(std::vector<PointSet<Scalar>>{std::move(single)}) {}

  std::size_t size() const noexcept { return sets_.size(); }
  Index dim() const noexcept { return sets_.front().dim(); }
  const PointSet<Scalar> &operator[](std::size_t b) const { return sets_[b]; }

  auto begin() const { return sets_.begin(); }
  auto end() const { return sets_.end(); }

private:
  std::vector<PointSet<Scalar>> sets_;
};

template <typename Scalar>
void require_same_dim(const PointSet<Scalar> &a, const PointSet<Scalar> &b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("point dimension mismatch: " +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
}

} // namespace apml
