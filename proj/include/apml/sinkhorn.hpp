#pragma once

#include <algorithm>
#include <vector>

#include "apml/adaptive_softmax.hpp"

namespace apml {

struct SinkhornConfig {
  int l_iter = 10;
  double eps_stab = 1e-8;

  void validate() const {
    if (l_iter < 1)
      throw InvalidArgument("l_iter must be >= 1");
    if (!(eps_stab > 0.0))
      throw InvalidArgument("eps_stab must be positive");
  }
};

/// Distance of row and column sums from 1, after each iteration and at the end.
struct MarginalResiduals {
  double max_row_dev = 0.0;
  double max_col_dev = 0.0;
  std::vector<double> row_history;
  std::vector<double> col_history;
};

/// Every intermediate of the iteration is diag(u) P0 diag(v) for some u, v.
/// Keeping the per-step divisors instead of the matrices lets the backward
/// pass rebuild each intermediate in O(NM) without storing 2L matrices.
template <typename Scalar> struct SinkhornTrace {
  std::vector<Vector<Scalar>> col_divisors; ///< column sums + eps, per step
  std::vector<Vector<Scalar>> row_divisors; ///< row sums + eps, per step
  Vector<Scalar> row_scale;                 ///< final u
  Vector<Scalar> col_scale;                 ///< final v
  MarginalResiduals residuals;

  /// diag(u) P0 diag(v)
  Matrix<Scalar> apply(const Matrix<Scalar> &p0) const {
    return (p0.array().colwise() * row_scale.array()).rowwise() *
           col_scale.transpose().array();
  }
};

namespace detail {

template <typename Scalar> void check_transport_input(const Matrix<Scalar> &p) {
  if (p.size() == 0)
    throw EmptyInput("transport matrix is empty");
  if (!p.allFinite())
    throw NonFiniteInput("transport matrix contains NaN or Inf");
  if ((p.array() < Scalar(0)).any())
    throw InvalidArgument("transport matrix has negative entries");
  if ((p.rowwise().sum().array() <= Scalar(0)).any())
    throw DegenerateMarginal("transport matrix has an all-zero row");
  if ((p.colwise().sum().array() <= Scalar(0)).any())
    throw DegenerateMarginal("transport matrix has an all-zero column");
}

template <typename Scalar>
double max_abs_dev_from_one(const Vector<Scalar> &sums) {
  return static_cast<double>((sums.array() - Scalar(1)).abs().maxCoeff());
}

} // namespace detail

/// Runs l_iter rounds of column-then-row normalization, each divisor
/// offset by eps_stab, and records the scalings.
template <typename Scalar>
SinkhornTrace<Scalar> sinkhorn_trace(const Matrix<Scalar> &p0,
                                     const SinkhornConfig &cfg) {
  cfg.validate();
  detail::check_transport_input(p0);
  const Scalar eps = static_cast<Scalar>(cfg.eps_stab);
  const Index n = p0.rows(), m = p0.cols();

  SinkhornTrace<Scalar> tr;
  tr.col_divisors.reserve(static_cast<std::size_t>(cfg.l_iter));
  tr.row_divisors.reserve(static_cast<std::size_t>(cfg.l_iter));
  Vector<Scalar> u = Vector<Scalar>::Ones(n);
  Vector<Scalar> v = Vector<Scalar>::Ones(m);

  Vector<Scalar> col_sums = p0.transpose() * u;
  for (int l = 0; l < cfg.l_iter; ++l) {
    Vector<Scalar> s = col_sums.array() + eps;
    v.array() /= s.array();
    tr.col_divisors.push_back(std::move(s));

    Vector<Scalar> row_sums = (p0 * v).cwiseProduct(u);
    Vector<Scalar> r = row_sums.array() + eps;
    u.array() /= r.array();
    row_sums.array() /= r.array();
    tr.row_divisors.push_back(std::move(r));

    col_sums = (p0.transpose() * u).cwiseProduct(v);
    tr.residuals.row_history.push_back(detail::max_abs_dev_from_one(row_sums));
    tr.residuals.col_history.push_back(detail::max_abs_dev_from_one(col_sums));
  }
  tr.row_scale = std::move(u);
  tr.col_scale = std::move(v);
  tr.residuals.max_row_dev = tr.residuals.row_history.back();
  tr.residuals.max_col_dev = tr.residuals.col_history.back();
  return tr;
}

/// Alternating column/row normalization toward a doubly stochastic matrix.
/// Rows end normalized because the row step runs last.
template <typename Scalar>
std::pair<AssignmentMatrix<Scalar>, MarginalResiduals>
sinkhorn_normalize(const AssignmentMatrix<Scalar> &p,
                   const SinkhornConfig &cfg) {
  auto tr = sinkhorn_trace(p, cfg);
  AssignmentMatrix<Scalar> out = tr.apply(p);
  // Report the marginals of the matrix actually returned.
  tr.residuals.max_row_dev =
      detail::max_abs_dev_from_one<Scalar>(out.rowwise().sum());
  tr.residuals.max_col_dev =
      detail::max_abs_dev_from_one<Scalar>(out.colwise().sum().transpose());
  return {std::move(out), std::move(tr.residuals)};
}

/// Adjoint of the iteration: maps dL/dP_final to dL/dP0.
template <typename Scalar>
Matrix<Scalar> sinkhorn_backward(const Matrix<Scalar> &p0,
                                 const SinkhornTrace<Scalar> &tr,
                                 Matrix<Scalar> grad) {
  const Index n = p0.rows(), m = p0.cols();
  const std::size_t steps = tr.col_divisors.size();

  // Cumulative scalings after each half-step, rebuilt from the divisors.
  std::vector<Vector<Scalar>> u_after(steps + 1), v_after(steps + 1);
  u_after[0] = Vector<Scalar>::Ones(n);
  v_after[0] = Vector<Scalar>::Ones(m);
  for (std::size_t l = 0; l < steps; ++l) {
    v_after[l + 1] = v_after[l].array() / tr.col_divisors[l].array();
    u_after[l + 1] = u_after[l].array() / tr.row_divisors[l].array();
  }

  Matrix<Scalar> state(n, m);
  for (std::size_t l = steps; l-- > 0;) {
    // Row step: out_ij = in_ij / r_i.
    state = (p0.array().colwise() * u_after[l + 1].array()).rowwise() *
            v_after[l + 1].transpose().array();
    Vector<Scalar> row_dot = grad.cwiseProduct(state).rowwise().sum();
    grad = ((grad.colwise() - row_dot).array().colwise() /
            tr.row_divisors[l].array())
               .matrix();

    // Column step: out_ij = in_ij / s_j.
    state = (p0.array().colwise() * u_after[l].array()).rowwise() *
            v_after[l + 1].transpose().array();
    RowVector<Scalar> col_dot = grad.cwiseProduct(state).colwise().sum();
    grad = ((grad.rowwise() - col_dot).array().rowwise() /
            tr.col_divisors[l].transpose().array())
               .matrix();
  }
  return grad;
}

} // namespace apml
