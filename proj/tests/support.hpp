#pragma once

// Test-only helpers and independent oracles. Nothing here calls into the
// code path it is used to check.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "apml/apml.hpp"

namespace apml::testing {

inline PointSet<double> random_cloud(Index n, Index d, std::mt19937_64 &rng,
                                     double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix<double> m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k)
      m(i, k) = u(rng);
  return PointSet<double>(std::move(m));
}

/// Sinkhorn written as the explicit per-column, per-row division loops.
inline Matrix<double> sinkhorn_loops(Matrix<double> p, int l_iter, double eps) {
  for (int l = 0; l < l_iter; ++l) {
    for (Index j = 0; j < p.cols(); ++j) {
      double s = 0.0;
      for (Index i = 0; i < p.rows(); ++i)
        s += p(i, j);
      for (Index i = 0; i < p.rows(); ++i)
        p(i, j) /= s + eps;
    }
    for (Index i = 0; i < p.rows(); ++i) {
      double s = 0.0;
      for (Index j = 0; j < p.cols(); ++j)
        s += p(i, j);
      for (Index j = 0; j < p.cols(); ++j)
        p(i, j) /= s + eps;
    }
  }
  return p;
}

/// Softmax of one vector by the textbook recipe, scalar loops only.
inline std::vector<double> softmax_reference(const std::vector<double> &c,
                                             double p_min = 0.8,
                                             double delta = 1e-6,
                                             double eps_gap = 1e-5) {
  const std::size_t k = c.size();
  if (k == 1)
    return {1.0};
  double lo = c[0];
  for (double v : c)
    lo = std::min(lo, v);
  double second = INFINITY;
  for (double v : c)
    if (v - lo > 0.0)
      second = std::min(second, v - lo);
  if (!std::isfinite(second) || second < eps_gap)
    return std::vector<double>(k, 1.0 / static_cast<double>(k));
  const double t = -std::log((1 - p_min) / ((k - 1) * p_min)) / (second + delta);
  std::vector<double> out(k);
  double z = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    z += out[j] = std::exp(-t * (c[j] - lo));
  for (auto &v : out)
    v /= z;
  return out;
}

/// Central differences of f with respect to every coordinate of x.
inline Matrix<double>
central_differences(const std::function<double(const Matrix<double> &)> &f,
                    const Matrix<double> &x, double h) {
  Matrix<double> g(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index k = 0; k < x.cols(); ++k) {
      Matrix<double> xp = x, xm = x;
      xp(i, k) += h;
      xm(i, k) -= h;
      g(i, k) = (f(xp) - f(xm)) / (2.0 * h);
    }
  return g;
}

/// Which entries are min / second-distinct and whether the override fired,
/// for every row and column. Equal signatures mean the piecewise-smooth
/// pieces are the same.
using OrderSignature = std::vector<std::tuple<Index, Index, bool>>;

inline OrderSignature order_signature(const Matrix<double> &pred,
                                      const PointSet<double> &truth,
                                      const ApmlConfig &cfg) {
  const auto dir =
      directional_assignments(cost_matrix(PointSet<double>(pred), truth),
                              cfg.softmax);
  OrderSignature sig;
  for (const auto *v : {&dir.rows, &dir.cols})
    for (const auto &d : *v)
      sig.emplace_back(d.min_index, d.second_index, d.override_fired);
  return sig;
}

/// True when no single-coordinate perturbation of size h changes the
/// order statistics.
inline bool locally_constant(const Matrix<double> &pred,
                             const PointSet<double> &truth,
                             const ApmlConfig &cfg, double h) {
  const auto base = order_signature(pred, truth, cfg);
  for (Index i = 0; i < pred.rows(); ++i)
    for (Index k = 0; k < pred.cols(); ++k)
      for (double s : {-h, h}) {
        Matrix<double> x = pred;
        x(i, k) += s;
        if (order_signature(x, truth, cfg) != base)
          return false;
      }
  return true;
}

/// max_k |a_k - b_k| / max(|a_k|, |b_k|, floor)
inline double max_relative_error(const Matrix<double> &a,
                                 const Matrix<double> &b, double floor) {
  double worst = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    const double denom =
        std::max({std::abs(a(k)), std::abs(b(k)), floor});
    worst = std::max(worst, std::abs(a(k) - b(k)) / denom);
  }
  return worst;
}

/// Scratch directory removed on scope exit.
class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("apml-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  std::string file(const std::string &name) const {
    return (path_ / name).string();
  }

private:
  std::filesystem::path path_;
};

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace apml::testing
