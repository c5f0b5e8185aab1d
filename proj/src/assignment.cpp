#include "apml/assignment.hpp"

#include <algorithm>
#include <limits>

#include "apml/error.hpp"

namespace apml {

std::vector<Eigen::Index> solve_assignment(const Eigen::MatrixXd &cost) {
  using Eigen::Index;
  const Index n = cost.rows();
  if (n == 0)
    throw EmptyInput("assignment problem is empty");
  if (cost.cols() != n)
    throw DimensionMismatch("assignment solver expects a square matrix");
  if (!cost.allFinite())
    throw NonFiniteInput("assignment cost contains NaN or Inf");

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based bookkeeping; index 0 is the virtual source column.
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<Index> match_of_col(n + 1, 0), prev(n + 1, 0);
  std::vector<double> slack(n + 1);
  std::vector<char> used(n + 1);

  for (Index i = 1; i <= n; ++i) {
    match_of_col[0] = i;
    Index j0 = 0;
    std::fill(slack.begin(), slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = match_of_col[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j])
          continue;
        const double reduced =
            cost(i0 - 1, j - 1) - row_pot[i0] - col_pot[j];
        if (reduced < slack[j]) {
          slack[j] = reduced;
          prev[j] = j0;
        }
        if (slack[j] < delta) {
          delta = slack[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          row_pot[match_of_col[j]] += delta;
          col_pot[j] -= delta;
        } else {
          slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_of_col[j0] != 0);
    do {
      const Index j1 = prev[j0];
      match_of_col[j0] = match_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Index> col_of_row(n);
  for (Index j = 1; j <= n; ++j)
    col_of_row[match_of_col[j] - 1] = j - 1;
  return col_of_row;
}

} // namespace apml
