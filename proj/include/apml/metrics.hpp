#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "apml/assignment.hpp"
#include "apml/cost_matrix.hpp"

namespace apml {

enum class EmdNormalization {
  Sum,          ///< raw optimal matching cost
  MeanPerPoint, ///< divided by the matched cardinality
};

struct F1Score {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct MetricReport {
  double cd_l1 = 0.0;
  double cd_l2 = 0.0;
  double emd = 0.0;
  double emd_times_100 = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double tau = 0.01;
};

inline constexpr double kDefaultF1Tau = 0.01;
inline constexpr double kF1Epsilon = 1e-8;

namespace detail {

// Squared distance from every point of `a` to its nearest neighbour in `b`,
// with the neighbour's index.
template <typename Scalar> struct Nearest {
  Vector<Scalar> sq_dist;
  std::vector<Index> index;
};

template <typename Scalar>
std::pair<Nearest<Scalar>, Nearest<Scalar>>
nearest_both_ways(const PointSet<Scalar> &a, const PointSet<Scalar> &b) {
  const CostMatrix<Scalar> sq = squared_cost_matrix(a, b);
  Nearest<Scalar> ab{Vector<Scalar>(sq.rows()),
                     std::vector<Index>(static_cast<std::size_t>(sq.rows()))};
  Nearest<Scalar> ba{Vector<Scalar>(sq.cols()),
                     std::vector<Index>(static_cast<std::size_t>(sq.cols()))};
  for (Index i = 0; i < sq.rows(); ++i)
    ab.sq_dist(i) = sq.row(i).minCoeff(&ab.index[static_cast<std::size_t>(i)]);
  for (Index j = 0; j < sq.cols(); ++j)
    ba.sq_dist(j) = sq.col(j).minCoeff(&ba.index[static_cast<std::size_t>(j)]);
  return {std::move(ab), std::move(ba)};
}

} // namespace detail

/// Mean nearest-neighbour distance pred->truth plus truth->pred.
template <typename Scalar>
Scalar chamfer_l1(const PointSet<Scalar> &pred, const PointSet<Scalar> &truth) {
  const auto [ab, ba] = detail::nearest_both_ways(pred, truth);
  return ab.sq_dist.array().sqrt().mean() + ba.sq_dist.array().sqrt().mean();
}

/// As chamfer_l1 with squared distances.
template <typename Scalar>
Scalar chamfer_l2(const PointSet<Scalar> &pred, const PointSet<Scalar> &truth) {
  const auto [ab, ba] = detail::nearest_both_ways(pred, truth);
  return ab.sq_dist.mean() + ba.sq_dist.mean();
}

/// Chamfer value and its (sub)gradient with respect to `pred`. Nearest
/// neighbours are held fixed; ties resolve to the lowest index.
template <typename Scalar>
std::pair<Scalar, Matrix<Scalar>>
chamfer_gradient(const PointSet<Scalar> &pred, const PointSet<Scalar> &truth,
                 bool squared) {
  const auto [ab, ba] = detail::nearest_both_ways(pred, truth);
  const Scalar wn = Scalar(1) / static_cast<Scalar>(pred.size());
  const Scalar wm = Scalar(1) / static_cast<Scalar>(truth.size());
  Matrix<Scalar> grad = Matrix<Scalar>::Zero(pred.size(), pred.dim());
  Scalar value = Scalar(0);

  auto accumulate = [&](Index i, Index j, Scalar sq, Scalar w) {
    const auto diff = pred.point(i) - truth.point(j);
    if (squared) {
      value += w * sq;
      grad.row(i) += Scalar(2) * w * diff;
    } else {
      const Scalar dist = std::sqrt(sq);
      value += w * dist;
      if (dist > Scalar(0))
        grad.row(i) += (w / dist) * diff;
    }
  };
  for (Index i = 0; i < pred.size(); ++i)
    accumulate(i, ab.index[static_cast<std::size_t>(i)], ab.sq_dist(i), wn);
  for (Index j = 0; j < truth.size(); ++j)
    accumulate(ba.index[static_cast<std::size_t>(j)], j, ba.sq_dist(j), wm);
  return {value, std::move(grad)};
}

/// Precision and recall of nearest-neighbour distances strictly below tau.
template <typename Scalar>
F1Score f1_score(const PointSet<Scalar> &pred, const PointSet<Scalar> &truth,
                 double tau = kDefaultF1Tau) {
  if (!(tau > 0.0))
    throw InvalidArgument("F1 threshold tau must be positive");
  const auto [ab, ba] = detail::nearest_both_ways(pred, truth);
  const double tau_sq = tau * tau;
  auto fraction_within = [tau_sq](const Vector<Scalar> &sq) {
    Index hits = 0;
    for (Index k = 0; k < sq.size(); ++k)
      hits += static_cast<double>(sq(k)) < tau_sq ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(sq.size());
  };
  F1Score s;
  s.precision = fraction_within(ab.sq_dist);
  s.recall = fraction_within(ba.sq_dist);
  s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall + kF1Epsilon);
  return s;
}

/// `count` points drawn without replacement, in their original order.
template <typename Scalar>
PointSet<Scalar> subsample(const PointSet<Scalar> &set, Index count,
                           std::uint64_t seed) {
  if (count < 1 || count > set.size())
    throw InvalidArgument("subsample count out of range");
  std::vector<Index> idx(static_cast<std::size_t>(set.size()));
  std::iota(idx.begin(), idx.end(), Index(0));
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates over the first `count` slots.
  for (Index k = 0; k < count; ++k) {
    std::uniform_int_distribution<Index> pick(k, set.size() - 1);
    std::swap(idx[static_cast<std::size_t>(k)],
              idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  Matrix<Scalar> pts(count, set.dim());
  for (Index k = 0; k < count; ++k)
    pts.row(k) = set.point(idx[static_cast<std::size_t>(k)]);
  return PointSet<Scalar>(std::move(pts));
}

/// Exact EMD: minimum over bijections of the summed Euclidean distance.
/// Unequal cardinalities are handled by subsampling the larger set with
/// `seed`.
template <typename Scalar>
double emd_exact(const PointSet<Scalar> &pred, const PointSet<Scalar> &truth,
                 EmdNormalization norm = EmdNormalization::Sum,
                 std::uint64_t seed = 0) {
  require_same_dim(pred, truth);
  const Index k = std::min(pred.size(), truth.size());
  const PointSet<Scalar> a =
      pred.size() > k ? subsample(pred, k, seed) : pred;
  const PointSet<Scalar> b =
      truth.size() > k ? subsample(truth, k, seed) : truth;
  const Eigen::MatrixXd cost = cost_matrix(a, b).template cast<double>();
  const auto match = solve_assignment(cost);
  double total = 0.0;
  for (Index i = 0; i < k; ++i)
    total += cost(i, match[static_cast<std::size_t>(i)]);
  return norm == EmdNormalization::Sum ? total
                                       : total / static_cast<double>(k);
}

inline constexpr Index kBruteForceLimit = 8;

/// Enumerates every bijection. Test oracle for emd_exact (Sum).
template <typename Scalar>
double emd_bruteforce(const PointSet<Scalar> &pred,
                      const PointSet<Scalar> &truth) {
  require_same_dim(pred, truth);
  if (pred.size() != truth.size())
    throw OracleLimit("brute-force EMD needs equal cardinalities");
  if (pred.size() > kBruteForceLimit)
    throw OracleLimit("brute-force EMD is limited to 8 points");
  const Eigen::MatrixXd cost = cost_matrix(pred, truth).template cast<double>();
  std::vector<Index> perm(static_cast<std::size_t>(pred.size()));
  std::iota(perm.begin(), perm.end(), Index(0));
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Index i = 0; i < pred.size(); ++i)
      total += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct MetricOptions {
  double tau = kDefaultF1Tau;
  EmdNormalization emd_normalization = EmdNormalization::MeanPerPoint;
  std::uint64_t seed = 0;
};

template <typename Scalar>
MetricReport metric_report(const PointSet<Scalar> &pred,
                           const PointSet<Scalar> &truth,
                           const MetricOptions &opt = {}) {
  MetricReport r;
  r.cd_l1 = static_cast<double>(chamfer_l1(pred, truth));
  r.cd_l2 = static_cast<double>(chamfer_l2(pred, truth));
  r.emd = emd_exact(pred, truth, opt.emd_normalization, opt.seed);
  r.emd_times_100 = 100.0 * r.emd;
  const F1Score f = f1_score(pred, truth, opt.tau);
  r.f1 = f.f1;
  r.precision = f.precision;
  r.recall = f.recall;
  r.tau = opt.tau;
  return r;
}

} // namespace apml
