#include <doctest.h>

#include "support.hpp"

using namespace apml;
using apml::testing::random_cloud;
using apml::testing::sinkhorn_loops;

namespace {

Matrix<double> mat2(double a, double b, double c, double d) {
  Matrix<double> m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix<double> symmetrized_from_clouds(Index n, Index m, std::mt19937_64 &rng) {
  const auto x = random_cloud(n, 3, rng);
  const auto y = random_cloud(m, 3, rng);
  const auto a = directional_assignments(cost_matrix(x, y), {});
  return symmetrize(a.row_stochastic, a.col_stochastic);
}

} // namespace

TEST_SUITE("sinkhorn") {

TEST_CASE("uniform fixed point") {
  // The offset alone moves each entry by about eps / 2.
  const auto [p, res] = sinkhorn_normalize(mat2(1, 1, 1, 1), {1, 1e-12});
  CHECK((p.array() - 0.5).abs().maxCoeff() <= 1e-9);
  CHECK(res.row_history.size() == 1);
  const auto p_default = sinkhorn_normalize(mat2(1, 1, 1, 1), {1, 1e-8}).first;
  CHECK((p_default.array() - 0.5).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("doubly stochastic input is unchanged") {
  const auto in = mat2(0.9, 0.1, 0.1, 0.9);
  const auto [p, res] = sinkhorn_normalize(in, {10, 1e-8});
  CHECK((p - in).cwiseAbs().maxCoeff() <= 1e-8);
  // Fixed-point drift bound l_iter * eps * N.
  CHECK((p - in).cwiseAbs().maxCoeff() <= 10 * 1e-8 * 2);
}

TEST_CASE("one iteration by hand") {
  // Columns already sum to 1; the row step then equalizes each row.
  const auto [p, res] = sinkhorn_normalize(mat2(0.8, 0.8, 0.2, 0.2), {1, 1e-8});
  CHECK((p.array() - 0.5).abs().maxCoeff() <= 1e-7);
}

TEST_CASE("degenerate marginals are rejected") {
  CHECK_THROWS_AS(sinkhorn_normalize(mat2(1, 1, 0, 0), {}), DegenerateMarginal);
  CHECK_THROWS_AS(sinkhorn_normalize(mat2(1, 0, 1, 0), {}), DegenerateMarginal);
  CHECK_THROWS_AS(sinkhorn_normalize(mat2(1, -1, 1, 1), {}), InvalidArgument);
  CHECK_THROWS_AS(sinkhorn_normalize(mat2(1, 1, 1, 1), {0, 1e-8}),
                  InvalidArgument);
  CHECK_THROWS_AS(sinkhorn_normalize(mat2(1, 1, 1, 1), {3, 0.0}),
                  InvalidArgument);
}

TEST_CASE("scaling form agrees with explicit division loops") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p0 = symmetrized_from_clouds(10 + trial, 14 - trial, rng);
    for (int l : {1, 3, 10}) {
      const auto [p, res] = sinkhorn_normalize(p0, {l, 1e-8});
      const auto ref = sinkhorn_loops(p0, l, 1e-8);
      CHECK((p - ref).cwiseAbs().maxCoeff() <= 1e-13);
      CHECK(res.row_history.size() == static_cast<std::size_t>(l));
      CHECK(res.max_row_dev <= 1e-6);
      CHECK((p.array() >= 0.0).all());
    }
  }
}

TEST_CASE("column deviation does not grow with more iterations") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p0 = symmetrized_from_clouds(32, 32, rng);
    const double after1 = sinkhorn_normalize(p0, {1, 1e-8}).second.max_col_dev;
    const double after10 =
        sinkhorn_normalize(p0, {10, 1e-8}).second.max_col_dev;
    CHECK(after10 <= after1);
  }
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(31);
  const auto p0 = symmetrized_from_clouds(6, 9, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> pr(6), pc(9);
  pr.setIdentity();
  pc.setIdentity();
  std::shuffle(pr.indices().data(), pr.indices().data() + 6, rng);
  std::shuffle(pc.indices().data(), pc.indices().data() + 9, rng);
  const Matrix<double> permuted = pr * p0 * pc;
  const auto a = sinkhorn_normalize(permuted, {}).first;
  const Matrix<double> b = pr * sinkhorn_normalize(p0, {}).first * pc;
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("backward pass matches finite differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // Entries away from zero so the perturbed input stays nonnegative.
  const Matrix<double> p0 =
      (Matrix<double>::Random(5, 4).array().abs() + 0.1).matrix();
  Matrix<double> weights(5, 4);
  for (Index k = 0; k < weights.size(); ++k)
    weights(k) = u(rng);
  const SinkhornConfig cfg{4, 1e-8};
  auto objective = [&](const Matrix<double> &p) {
    return sinkhorn_normalize(p, cfg).first.cwiseProduct(weights).sum();
  };
  const auto tr = sinkhorn_trace(p0, cfg);
  const auto analytic = sinkhorn_backward(p0, tr, weights);
  const auto numeric = apml::testing::central_differences(objective, p0, 1e-6);
  CHECK((analytic - numeric).cwiseAbs().maxCoeff() <= 1e-7);
}

} // TEST_SUITE
