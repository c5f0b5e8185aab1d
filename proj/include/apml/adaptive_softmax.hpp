#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "apml/cost_matrix.hpp"

namespace apml {

struct AdaptiveSoftmaxConfig {
  double p_min = 0.8;   ///< probability the best match should receive
  double delta = 1e-6;  ///< margin added to the gap
  double eps_gap = 1e-5; ///< below this second-distinct cost, fall back to uniform

  void validate() const {
    if (!(p_min > 0.0 && p_min < 1.0))
      throw InvalidArgument("p_min must lie in (0, 1)");
    if (!(delta > 0.0))
      throw InvalidArgument("delta must be positive");
    if (!(eps_gap > 0.0))
      throw InvalidArgument("eps_gap must be positive");
    if (!(eps_gap > delta))
      throw InvalidArgument("eps_gap must exceed delta");
  }
};

/// What the adaptive softmax decided for one cost vector.
struct SoftmaxDiagnostics {
  double temperature = 0.0; ///< 0 when the override fired or K == 1
  double gap = 0.0;         ///< second-distinct normalized cost plus delta
  bool override_fired = false;
  bool deterministic = false; ///< K == 1
  Index min_index = 0;        ///< first index attaining the minimum
  Index second_index = -1;    ///< first index attaining the second distinct value
};

/// Result of scanning a normalized cost vector for its local gap.
template <typename Scalar> struct LocalGap {
  Scalar gap;          ///< c2 + delta
  Scalar second;       ///< c2, 0 when every entry is equal
  Index second_index;  ///< -1 when every entry is equal
  bool degenerate;     ///< c2 < eps_gap
};

namespace detail {

// x <- exp(scale * x); results below sqrt(smallest normal) become exactly
// zero, which keeps later products of the plan out of the subnormal range.
template <typename Derived>
void exp_flushed(Eigen::MatrixBase<Derived> &x,
                 typename Derived::Scalar scale) {
  using Scalar = typename Derived::Scalar;
  static const Scalar cutoff =
      Scalar(0.5) * std::log(std::numeric_limits<Scalar>::min());
  x = x * scale;
  x = (x.array() < cutoff)
          .select(Scalar(0), x.array().max(cutoff).exp())
          .matrix();
}

} // namespace detail

/// c - min(c). The minimum of the result is exactly zero.
template <typename Derived>
Vector<typename Derived::Scalar>
normalize_costs(const Eigen::MatrixBase<Derived> &c) {
  if (c.size() < 1)
    throw EmptyInput("cost vector is empty");
  if (!c.allFinite())
    throw NonFiniteInput("cost vector contains NaN or Inf");
  return (c.array() - c.minCoeff()).matrix();
}

/// Smallest strictly positive value of a min-subtracted vector, offset by
/// delta. Repeated minima are skipped; an all-equal vector has no second
/// value and is reported as degenerate.
template <typename Derived>
LocalGap<typename Derived::Scalar>
local_gap(const Eigen::MatrixBase<Derived> &c_norm, double delta,
          double eps_gap) {
  using Scalar = typename Derived::Scalar;
  Scalar second = std::numeric_limits<Scalar>::infinity();
  Index second_index = -1;
  for (Index k = 0; k < c_norm.size(); ++k) {
    const Scalar v = c_norm(k);
    if (v > Scalar(0) && v < second) {
      second = v;
      second_index = k;
    }
  }
  if (second_index < 0)
    second = Scalar(0);
  return {second + static_cast<Scalar>(delta), second, second_index,
          second < static_cast<Scalar>(eps_gap)};
}

/// T = -log((1 - p_min) / ((K - 1) p_min)) / g.
template <typename Scalar>
Scalar adaptive_temperature(Scalar gap, Index k, double p_min) {
  if (k < 2)
    throw InvalidArgument("adaptive temperature needs K >= 2; K == 1 is "
                          "deterministic");
  if (!(gap > Scalar(0)))
    throw InvalidArgument("gap must be positive");
  if (!(p_min > 0.0 && p_min < 1.0))
    throw InvalidArgument("p_min must lie in (0, 1)");
  const Scalar ratio = static_cast<Scalar>(
      (1.0 - p_min) / (static_cast<double>(k - 1) * p_min));
  const Scalar t = -std::log(ratio) / gap;
  if (!(t > Scalar(0)))
    throw NonPositiveTemperature("p_min must exceed 1/K for a positive "
                                 "temperature");
  return t;
}

/// Adaptive softmax of `c`, written into `out` (same length). Returns the
/// decisions taken so they can be replayed or differentiated.
template <typename In, typename Out>
SoftmaxDiagnostics adaptive_softmax_into(const Eigen::MatrixBase<In> &c,
                                         Eigen::MatrixBase<Out> const &out_,
                                         const AdaptiveSoftmaxConfig &cfg) {
  using Scalar = typename In::Scalar;
  auto &out = const_cast<Eigen::MatrixBase<Out> &>(out_);
  const Index k = c.size();
  if (k < 1)
    throw EmptyInput("cost vector is empty");
  if (!c.allFinite())
    throw NonFiniteInput("cost vector contains NaN or Inf");

  SoftmaxDiagnostics diag;
  const Scalar lowest = c.minCoeff(&diag.min_index);
  if (k == 1) {
    diag.deterministic = true;
    out(0) = Scalar(1);
    return diag;
  }

  out = (c.array() - lowest).matrix();
  const auto lg = local_gap(out, cfg.delta, cfg.eps_gap);
  diag.gap = static_cast<double>(lg.gap);
  diag.second_index = lg.second_index;
  if (lg.degenerate) {
    diag.override_fired = true;
    out.setConstant(Scalar(1) / static_cast<Scalar>(k));
    return diag;
  }

  const Scalar t = adaptive_temperature(lg.gap, k, cfg.p_min);
  diag.temperature = static_cast<double>(t);
  // Exponents are <= 0 because out >= 0 and t > 0: no overflow, and the
  // minimum contributes exp(0) = 1 so the sum is >= 1.
  detail::exp_flushed(out, -t);
  out /= out.sum();
  return diag;
}

/// Softmax with a temperature and override decision fixed in advance.
template <typename In, typename Out>
void replay_softmax_into(const Eigen::MatrixBase<In> &c,
                         Eigen::MatrixBase<Out> const &out_,
                         const SoftmaxDiagnostics &frozen) {
  using Scalar = typename In::Scalar;
  auto &out = const_cast<Eigen::MatrixBase<Out> &>(out_);
  const Index k = c.size();
  if (frozen.deterministic) {
    out.setOnes();
    return;
  }
  if (frozen.override_fired) {
    out.setConstant(Scalar(1) / static_cast<Scalar>(k));
    return;
  }
  const Scalar t = static_cast<Scalar>(frozen.temperature);
  out = (c.array() - c.minCoeff()).matrix();
  detail::exp_flushed(out, -t);
  out /= out.sum();
}

template <typename Derived>
std::pair<Vector<typename Derived::Scalar>, SoftmaxDiagnostics>
adaptive_softmax_vec(const Eigen::MatrixBase<Derived> &c,
                     const AdaptiveSoftmaxConfig &cfg) {
  Vector<typename Derived::Scalar> out(c.size());
  auto diag = adaptive_softmax_into(c, out, cfg);
  return {std::move(out), diag};
}

template <typename Scalar> using AssignmentMatrix = Matrix<Scalar>;

/// Row-wise (P1, each row sums to 1) and column-wise (P2, each column sums
/// to 1) adaptive softmax of a cost matrix.
template <typename Scalar> struct DirectionalAssignments {
  AssignmentMatrix<Scalar> row_stochastic;
  AssignmentMatrix<Scalar> col_stochastic;
  std::vector<SoftmaxDiagnostics> rows;
  std::vector<SoftmaxDiagnostics> cols;
};

namespace detail {

// Applies the adaptive softmax to every column; columns are contiguous in
// Eigen's default storage.
template <typename Scalar>
std::vector<SoftmaxDiagnostics>
softmax_columns(const Matrix<Scalar> &c, Matrix<Scalar> &out,
                const AdaptiveSoftmaxConfig &cfg) {
  out.resize(c.rows(), c.cols());
  std::vector<SoftmaxDiagnostics> diags(static_cast<std::size_t>(c.cols()));
  for (Index j = 0; j < c.cols(); ++j)
    diags[static_cast<std::size_t>(j)] =
        adaptive_softmax_into(c.col(j), out.col(j), cfg);
  return diags;
}

template <typename Scalar>
void replay_columns(const Matrix<Scalar> &c, Matrix<Scalar> &out,
                    const std::vector<SoftmaxDiagnostics> &frozen) {
  out.resize(c.rows(), c.cols());
  for (Index j = 0; j < c.cols(); ++j)
    replay_softmax_into(c.col(j), out.col(j),
                        frozen[static_cast<std::size_t>(j)]);
}

} // namespace detail

template <typename Scalar>
DirectionalAssignments<Scalar>
directional_assignments(const CostMatrix<Scalar> &c,
                        const AdaptiveSoftmaxConfig &cfg) {
  cfg.validate();
  if (c.size() == 0)
    throw EmptyInput("cost matrix is empty");
  DirectionalAssignments<Scalar> out;
  out.cols = detail::softmax_columns(c, out.col_stochastic, cfg);
  const Matrix<Scalar> ct = c.transpose();
  Matrix<Scalar> rows_t;
  out.rows = detail::softmax_columns(ct, rows_t, cfg);
  out.row_stochastic = rows_t.transpose();
  return out;
}

/// Element-wise mean of the two directional assignments.
template <typename Scalar>
AssignmentMatrix<Scalar> symmetrize(const AssignmentMatrix<Scalar> &p1,
                                    const AssignmentMatrix<Scalar> &p2) {
  if (p1.rows() != p2.rows() || p1.cols() != p2.cols())
    throw DimensionMismatch("assignment matrices differ in shape");
  return (p1 + p2) * Scalar(0.5);
}

} // namespace apml
