#pragma once

// Exact solver for the balanced transportation problem
//   min sum_ij c_ij x_ij  s.t.  sum_j x_ij = a_i, sum_i x_ij = b_j, x >= 0
// by the primal network simplex on the bipartite graph (basis = spanning tree
// of m + k - 1 cells).

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace graphot {

struct PlanEntry {
  int source;
  int target;
  double mass;
};

struct TransportPlan {
  double cost = 0.0;
  std::vector<PlanEntry> entries;  // nonzero flows only
  int iterations = 0;
  // complementary slackness audit on the final basis
  double min_reduced_cost = 0.0;
  double marginal_error = 0.0;
  bool audit_ok = false;
};

class UnbalancedMassError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Supplies and demands must be non-negative with equal totals (to
/// `balance_tol`); throws UnbalancedMassError otherwise.
TransportPlan solve_transportation(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                   const Eigen::MatrixXd& cost, double balance_tol = 1e-9);

}  // namespace graphot
