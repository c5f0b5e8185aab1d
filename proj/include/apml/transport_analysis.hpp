#pragma once

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "apml/adaptive_softmax.hpp"

namespace apml {

inline constexpr double kSparsityThreshold = 1e-3;
inline constexpr double kHeatmapThreshold = 1e-4;
inline constexpr double kHistogramClamp = 0.05;

enum class HistogramMode {
  Linear,  ///< equal-width bins over [0, max entry]
  Clamped, ///< everything below 0.05 in the first bin, equal bins above
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t count = 0;
};

struct SparsityReport {
  double threshold = kSparsityThreshold;
  double fraction_above = 0.0; ///< share of entries strictly above threshold
  double sparsity = 1.0;       ///< 1 - fraction_above
  std::uint64_t n_entries = 0;
  std::uint64_t n_above = 0;
  std::vector<HistogramBin> histogram;
};

template <typename Scalar>
SparsityReport sparsity_stats(const AssignmentMatrix<Scalar> &p,
                              double threshold = kSparsityThreshold,
                              int n_bins = 20,
                              HistogramMode mode = HistogramMode::Linear) {
  if (!(threshold > 0.0))
    throw InvalidArgument("sparsity threshold must be positive");
  if (n_bins < 1)
    throw InvalidArgument("histogram needs at least one bin");
  if (p.size() == 0)
    throw EmptyInput("transport matrix is empty");

  SparsityReport r;
  r.threshold = threshold;
  r.n_entries = static_cast<std::uint64_t>(p.size());
  r.n_above = static_cast<std::uint64_t>(
      (p.array().template cast<double>() > threshold).count());
  r.fraction_above =
      static_cast<double>(r.n_above) / static_cast<double>(r.n_entries);
  r.sparsity = static_cast<double>(r.n_entries - r.n_above) /
               static_cast<double>(r.n_entries);

  const double max_entry = static_cast<double>(p.maxCoeff());
  const double top = max_entry > 0.0 ? max_entry : 1.0;

  // Edges: [lo_0, hi_0), ..., [lo_k, hi_k] with the top edge inclusive.
  std::vector<double> edges;
  const bool clamp = mode == HistogramMode::Clamped && n_bins > 1 &&
                     top > kHistogramClamp;
  if (clamp) {
    edges.push_back(0.0);
    const int rest = n_bins - 1;
    for (int b = 0; b <= rest; ++b)
      edges.push_back(kHistogramClamp +
                      (top - kHistogramClamp) * b / static_cast<double>(rest));
  } else {
    for (int b = 0; b <= n_bins; ++b)
      edges.push_back(top * b / static_cast<double>(n_bins));
  }
  const int bins = static_cast<int>(edges.size()) - 1;
  r.histogram.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    r.histogram[static_cast<std::size_t>(b)].lo = edges[static_cast<std::size_t>(b)];
    r.histogram[static_cast<std::size_t>(b)].hi =
        edges[static_cast<std::size_t>(b) + 1];
  }

  const double lo_uniform = clamp ? kHistogramClamp : 0.0;
  const int uniform_bins = clamp ? bins - 1 : bins;
  const double width = (top - lo_uniform) / uniform_bins;
  for (Index k = 0; k < p.size(); ++k) {
    const double v = static_cast<double>(p(k));
    int bin;
    if (clamp && v < kHistogramClamp) {
      bin = 0;
    } else {
      bin = static_cast<int>(std::floor((v - lo_uniform) / width));
      bin = std::clamp(bin, 0, uniform_bins - 1);
      if (clamp)
        ++bin;
    }
    ++r.histogram[static_cast<std::size_t>(bin)].count;
  }
  return r;
}

/// Coordinate-format copy of the entries >= threshold.
template <typename Scalar> struct SparseTransport {
  struct Entry {
    Index row;
    Index col;
    Scalar value;
  };

  Index rows = 0;
  Index cols = 0;
  double threshold = kSparsityThreshold;
  std::vector<Entry> entries;

  Matrix<Scalar> to_dense() const {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(rows, cols);
    for (const auto &e : entries)
      out(e.row, e.col) = e.value;
    return out;
  }

  Eigen::SparseMatrix<Scalar> to_sparse() const {
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(entries.size());
    for (const auto &e : entries)
      trip.emplace_back(e.row, e.col, e.value);
    Eigen::SparseMatrix<Scalar> out(rows, cols);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  }

  /// Bytes for the triplets versus the dense matrix.
  std::size_t sparse_bytes() const { return entries.size() * sizeof(Entry); }
  std::size_t dense_bytes() const {
    return static_cast<std::size_t>(rows * cols) * sizeof(Scalar);
  }
};

template <typename Scalar>
SparseTransport<Scalar>
threshold_sparsify(const AssignmentMatrix<Scalar> &p,
                   double threshold = kSparsityThreshold) {
  if (!(threshold > 0.0))
    throw InvalidArgument("sparsify threshold must be positive");
  SparseTransport<Scalar> out;
  out.rows = p.rows();
  out.cols = p.cols();
  out.threshold = threshold;
  for (Index j = 0; j < p.cols(); ++j)
    for (Index i = 0; i < p.rows(); ++i)
      if (static_cast<double>(p(i, j)) >= threshold)
        out.entries.push_back({i, j, p(i, j)});
  return out;
}

} // namespace apml
