#pragma once

#include <Eigen/Core>

#include <vector>

namespace apml {

/// Minimum-cost perfect matching on a square cost matrix (shortest
/// augmenting paths with dual potentials, O(n^3)). Returns, for every row,
/// the column it is matched to.
std::vector<Eigen::Index> solve_assignment(const Eigen::MatrixXd &cost);

} // namespace apml
