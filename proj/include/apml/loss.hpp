#pragma once

#include <optional>
#include <vector>

#include "apml/adaptive_softmax.hpp"
#include "apml/cost_matrix.hpp"
#include "apml/sinkhorn.hpp"

namespace apml {

enum class GradMode {
  Full,                ///< differentiate through the adaptive temperature too
  DetachedTemperature, ///< temperature and override decisions are constants
};

enum class Reduction {
  SumOverPoints,  ///< sum_ij P_ij C_ij per element
  MeanOverPoints, ///< the same, divided by the element's N
};

struct ApmlConfig {
  AdaptiveSoftmaxConfig softmax;
  SinkhornConfig sinkhorn;
  GradMode grad_mode = GradMode::DetachedTemperature;
  Reduction reduction = Reduction::SumOverPoints;

  void validate() const {
    softmax.validate();
    sinkhorn.validate();
  }
};

/// Per batch element record of the forward pass.
struct ElementDiagnostics {
  double loss = 0.0; ///< unreduced sum_ij P_ij C_ij
  std::vector<SoftmaxDiagnostics> rows;
  std::vector<SoftmaxDiagnostics> cols;
  MarginalResiduals residuals;

  std::size_t row_overrides() const { return count_overrides(rows); }
  std::size_t col_overrides() const { return count_overrides(cols); }

private:
  static std::size_t count_overrides(const std::vector<SoftmaxDiagnostics> &v) {
    std::size_t n = 0;
    for (const auto &d : v)
      n += d.override_fired ? 1 : 0;
    return n;
  }
};

template <typename Scalar> struct LossResult {
  Scalar loss = Scalar(0);
  /// dloss/dpred, one N x d matrix per batch element.
  std::optional<std::vector<Matrix<Scalar>>> grad_pred;
  /// Final (post-Sinkhorn) transport plan per element.
  std::optional<std::vector<AssignmentMatrix<Scalar>>> transport;
  std::vector<ElementDiagnostics> diagnostics;
};

namespace detail {

template <typename Scalar> struct ElementPass {
  CostMatrix<Scalar> cost;
  AssignmentMatrix<Scalar> row_p; // P1
  AssignmentMatrix<Scalar> col_p; // P2
  AssignmentMatrix<Scalar> sym_p; // P before Sinkhorn
  SinkhornTrace<Scalar> sinkhorn;
  ElementDiagnostics diag;
};

template <typename Scalar>
ElementPass<Scalar> element_forward(const PointSet<Scalar> &pred,
                                    const PointSet<Scalar> &truth,
                                    const ApmlConfig &cfg,
                                    const ElementDiagnostics *frozen) {
  ElementPass<Scalar> e;
  e.cost = cost_matrix(pred, truth);
  if (frozen) {
    if (frozen->rows.size() != static_cast<std::size_t>(e.cost.rows()) ||
        frozen->cols.size() != static_cast<std::size_t>(e.cost.cols()))
      throw DimensionMismatch("frozen schedule does not match the cost matrix");
    detail::replay_columns(e.cost, e.col_p, frozen->cols);
    const Matrix<Scalar> ct = e.cost.transpose();
    Matrix<Scalar> rows_t;
    detail::replay_columns(ct, rows_t, frozen->rows);
    e.row_p = rows_t.transpose();
    e.diag.rows = frozen->rows;
    e.diag.cols = frozen->cols;
  } else {
    auto dir = directional_assignments(e.cost, cfg.softmax);
    e.row_p = std::move(dir.row_stochastic);
    e.col_p = std::move(dir.col_stochastic);
    e.diag.rows = std::move(dir.rows);
    e.diag.cols = std::move(dir.cols);
  }
  e.sym_p = symmetrize(e.row_p, e.col_p);
  e.sinkhorn = sinkhorn_trace(e.sym_p, cfg.sinkhorn);
  e.diag.residuals = e.sinkhorn.residuals;
  // <diag(u) P diag(v), C> without materializing the plan.
  const Scalar loss = e.sinkhorn.row_scale.dot(
      e.sym_p.cwiseProduct(e.cost) * e.sinkhorn.col_scale);
  e.diag.loss = static_cast<double>(loss);
  return e;
}

// Adjoint of detail::softmax_columns: accumulates into dcost.
template <typename Scalar>
void softmax_columns_backward(const Matrix<Scalar> &cost,
                              const Matrix<Scalar> &probs,
                              const Matrix<Scalar> &grad,
                              const std::vector<SoftmaxDiagnostics> &diags,
                              GradMode mode, Matrix<Scalar> &dcost) {
  for (Index j = 0; j < cost.cols(); ++j) {
    const auto &d = diags[static_cast<std::size_t>(j)];
    // Constant outputs: no dependence on the costs.
    if (d.deterministic || d.override_fired)
      continue;
    const auto p = probs.col(j);
    const auto g = grad.col(j);
    const Vector<Scalar> dz = p.cwiseProduct((g.array() - p.dot(g)).matrix());
    const Scalar t = static_cast<Scalar>(d.temperature);
    const Index imin = d.min_index;

    dcost.col(j) -= t * dz;
    dcost(imin, j) += t * dz.sum();

    if (mode == GradMode::Full) {
      // t = const / gap, gap = c[second] - c[min] + delta.
      const Scalar cmin = cost(imin, j);
      const Scalar dt = -dz.dot((cost.col(j).array() - cmin).matrix());
      const Scalar dgap = -dt * t / static_cast<Scalar>(d.gap);
      dcost(d.second_index, j) += dgap;
      dcost(imin, j) -= dgap;
    }
  }
}

// dcost -> dpred through C_ij = ||x_i - y_j||; zero at coincident points.
template <typename Scalar>
Matrix<Scalar> cost_backward(const PointSet<Scalar> &pred,
                             const PointSet<Scalar> &truth,
                             const CostMatrix<Scalar> &cost,
                             const Matrix<Scalar> &dcost) {
  const Matrix<Scalar> w =
      (cost.array() > Scalar(0))
          .select(dcost.array() / cost.array(), Scalar(0))
          .matrix();
  return w.rowwise().sum().asDiagonal() * pred.points() - w * truth.points();
}

template <typename Scalar>
void check_pairing(const PointSetBatch<Scalar> &pred,
                   const PointSetBatch<Scalar> &truth) {
  if (pred.size() != truth.size())
    throw BatchMismatch("prediction and truth batches differ in size");
  if (pred.dim() != truth.dim())
    throw DimensionMismatch("prediction and truth batches differ in d");
}

template <typename Scalar>
Scalar element_weight(const ApmlConfig &cfg, std::size_t batch, Index n) {
  Scalar w = Scalar(1) / static_cast<Scalar>(batch);
  if (cfg.reduction == Reduction::MeanOverPoints)
    w /= static_cast<Scalar>(n);
  return w;
}

template <typename Scalar>
LossResult<Scalar> run(const PointSetBatch<Scalar> &pred,
                       const PointSetBatch<Scalar> &truth,
                       const ApmlConfig &cfg, bool with_grad,
                       bool keep_transport,
                       const std::vector<ElementDiagnostics> *frozen) {
  cfg.validate();
  check_pairing(pred, truth);
  if (frozen && frozen->size() != pred.size())
    throw BatchMismatch("frozen schedule does not match the batch");

  LossResult<Scalar> res;
  if (with_grad)
    res.grad_pred.emplace();
  if (keep_transport)
    res.transport.emplace();

  for (std::size_t b = 0; b < pred.size(); ++b) {
    auto e = element_forward(pred[b], truth[b], cfg,
                             frozen ? &(*frozen)[b] : nullptr);
    const Scalar w = element_weight<Scalar>(cfg, pred.size(), pred[b].size());
    res.loss += w * static_cast<Scalar>(e.diag.loss);

    if (with_grad || keep_transport) {
      AssignmentMatrix<Scalar> plan = e.sinkhorn.apply(e.sym_p);
      if (with_grad) {
        Matrix<Scalar> dcost = w * plan;
        const Matrix<Scalar> dsym =
            sinkhorn_backward(e.sym_p, e.sinkhorn, Matrix<Scalar>(w * e.cost));
        const Matrix<Scalar> half = Scalar(0.5) * dsym;
        softmax_columns_backward(e.cost, e.col_p, half, e.diag.cols,
                                 cfg.grad_mode, dcost);
        Matrix<Scalar> dcost_t = Matrix<Scalar>::Zero(e.cost.cols(),
                                                      e.cost.rows());
        softmax_columns_backward(Matrix<Scalar>(e.cost.transpose()),
                                 Matrix<Scalar>(e.row_p.transpose()),
                                 Matrix<Scalar>(half.transpose()),
                                 e.diag.rows, cfg.grad_mode, dcost_t);
        dcost += dcost_t.transpose();
        res.grad_pred->push_back(cost_backward(pred[b], truth[b], e.cost,
                                               dcost));
      }
      if (keep_transport)
        res.transport->push_back(std::move(plan));
    }
    res.diagnostics.push_back(std::move(e.diag));
  }
  return res;
}

} // namespace detail

/// Batch-mean of sum_ij P_ij C_ij, where P is the Sinkhorn-refined,
/// symmetrized adaptive-softmax assignment between each pair of sets.
template <typename Scalar>
LossResult<Scalar> apml_forward(const PointSetBatch<Scalar> &pred,
                                const PointSetBatch<Scalar> &truth,
                                const ApmlConfig &cfg = {},
                                bool keep_transport = false) {
  return detail::run(pred, truth, cfg, false, keep_transport, nullptr);
}

template <typename Scalar>
LossResult<Scalar> apml_forward(const PointSet<Scalar> &pred,
                                const PointSet<Scalar> &truth,
                                const ApmlConfig &cfg = {},
                                bool keep_transport = false) {
  return apml_forward(PointSetBatch<Scalar>(pred), PointSetBatch<Scalar>(truth),
                      cfg, keep_transport);
}

/// Forward pass and dloss/dpred. See GradMode for the two treatments of the
/// temperature.
template <typename Scalar>
LossResult<Scalar> apml_gradient(const PointSetBatch<Scalar> &pred,
                                 const PointSetBatch<Scalar> &truth,
                                 const ApmlConfig &cfg = {},
                                 bool keep_transport = false) {
  return detail::run(pred, truth, cfg, true, keep_transport, nullptr);
}

template <typename Scalar>
LossResult<Scalar> apml_gradient(const PointSet<Scalar> &pred,
                                 const PointSet<Scalar> &truth,
                                 const ApmlConfig &cfg = {},
                                 bool keep_transport = false) {
  return apml_gradient(PointSetBatch<Scalar>(pred),
                       PointSetBatch<Scalar>(truth), cfg, keep_transport);
}

/// Forward pass with temperatures and override decisions taken from a
/// previous run instead of recomputed. This is the function whose exact
/// derivative GradMode::DetachedTemperature returns.
template <typename Scalar>
LossResult<Scalar>
apml_forward_frozen(const PointSetBatch<Scalar> &pred,
                    const PointSetBatch<Scalar> &truth, const ApmlConfig &cfg,
                    const std::vector<ElementDiagnostics> &schedule) {
  return detail::run(pred, truth, cfg, false, false, &schedule);
}

} // namespace apml
