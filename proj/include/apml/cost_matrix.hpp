#pragma once

#include "apml/point_set.hpp"

namespace apml {

/// N x M matrix of pairwise distances, rows indexing the first set.
template <typename Scalar> using CostMatrix = Matrix<Scalar>;

namespace detail {

// Column j holds sum_k (a_ik - b_jk)^2. Differences are formed directly
// (no |a|^2 + |b|^2 - 2ab expansion) so the result is exactly symmetric
// under argument swap and unaffected by common translations.
template <typename Scalar>
CostMatrix<Scalar> pairwise_squared(const Matrix<Scalar> &a,
                                    const Matrix<Scalar> &b) {
  const Index n = a.rows(), m = b.rows(), d = a.cols();
  CostMatrix<Scalar> out(n, m);
  for (Index j = 0; j < m; ++j) {
    auto col = out.col(j).array();
    col = (a.col(0).array() - b(j, 0)).square();
    for (Index k = 1; k < d; ++k)
      col += (a.col(k).array() - b(j, k)).square();
  }
  return out;
}

} // namespace detail

template <typename Scalar>
CostMatrix<Scalar> squared_cost_matrix(const PointSet<Scalar> &pred,
                                       const PointSet<Scalar> &truth) {
  require_same_dim(pred, truth);
  return detail::pairwise_squared(pred.points(), truth.points());
}

/// C(i, j) = ||pred_i - truth_j||_2.
template <typename Scalar>
CostMatrix<Scalar> cost_matrix(const PointSet<Scalar> &pred,
                               const PointSet<Scalar> &truth) {
  CostMatrix<Scalar> c = squared_cost_matrix(pred, truth);
  c = c.array().sqrt();
  return c;
}

} // namespace apml
