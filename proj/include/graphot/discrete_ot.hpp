#pragma once

// Dynamic (Benamou-Brenier type) transport distance on a weighted graph.
//
// A path is T uniform time steps of densities rho_0..rho_T and piecewise
// constant antisymmetric fluxes V_0..V_{T-1} satisfying
//   (rho_{k+1} - rho_k) / dt + div V_k = 0,
// and its action is sum_k dt * A(rho_bar_k, V_k) with rho_bar_k the midpoint
// density (rho_k + rho_{k+1}) / 2 and
//   A(rho, V) = sum_{i,j} V(i,j)^2 / theta(rho_i, rho_j) * w_ij / n^2.
// W_n^2 is the infimum of the action over paths joining two densities.

#include "graphot/graph.hpp"
#include "graphot/interpolation.hpp"

#include <Eigen/Core>

#include <limits>
#include <string>
#include <vector>

namespace graphot {

/// Density with respect to the uniform measure on the nodes: values >= 0
/// with (1/n) sum = 1, so the constant 1 is the uniform measure.
class DiscreteDensity {
 public:
  DiscreteDensity() = default;
  /// Validates non-negativity and unit mass (to `tol`), then rescales the
  /// mass to one exactly.
  explicit DiscreteDensity(Eigen::VectorXd values, double tol = 1e-9);

  static DiscreteDensity uniform(int n);
  /// Point mass at node i: value n there, 0 elsewhere.
  static DiscreteDensity dirac(int n, int i);

  int size() const { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](int i) const { return values_[i]; }
  double mass() const { return values_.mean(); }

 private:
  Eigen::VectorXd values_;
};

struct TransportPath {
  int steps = 0;  // T
  std::vector<Eigen::VectorXd> densities;  // T + 1 slices
  std::vector<EdgeField> fluxes;           // T antisymmetric fields

  double dt() const { return 1.0 / steps; }
  Eigen::VectorXd midpoint(int k) const { return 0.5 * (densities[k] + densities[k + 1]); }
};

inline constexpr double kInfiniteAction = std::numeric_limits<double>::infinity();

/// A(rho, V) with the conventions 0^2/0 = 0 and v^2/0 = +inf for v != 0.
double action(const GeometricGraph& g, const InterpolationFn& theta, const Eigen::VectorXd& rho,
              const EdgeField& v);

/// Total action of a path.
double path_action(const GeometricGraph& g, const InterpolationFn& theta, const TransportPath& path);

/// max over nodes and intervals of |(rho_{k+1} - rho_k)/dt + div V_k|.
double continuity_residual(const GeometricGraph& g, const TransportPath& path);

/// Linear interpolation of densities with the minimal-Dirichlet flux
/// V_k = grad phi, Lap phi = rho1 - rho0, on every interval.
TransportPath initial_path(const GeometricGraph& g, const DiscreteDensity& rho0,
                           const DiscreteDensity& rho1, int steps);

struct SolverOptions {
  int steps = 32;
  int max_iter = 20000;
  double feas_tol = 1e-8;
  double rel_tol = 1e-6;  // relative objective improvement over `window` iterations
  int window = 10;
  int memory = 12;  // L-BFGS history
};

struct SolveReport {
  double distance_upper = 0.0;
  double action = 0.0;
  double feas_residual = 0.0;
  double gap_estimate = 0.0;
  int iterations = 0;
  bool converged = false;
  int steps = 0;
  std::string theta;
  std::string diagnostic;
  std::vector<double> objective_history;
  TransportPath path;
};

/// Minimizes the discrete action over paths joining rho0 to rho1.
///
/// The fluxes are eliminated: for fixed densities the cheapest flux on each
/// interval solves a weighted Laplacian system with edge weights
/// w_e * theta(rho_bar_i, rho_bar_j). The remaining convex problem in the
/// interior densities is minimized by L-BFGS over per-slice softmax
/// coordinates, which keep every iterate strictly positive with unit mass.
/// Every accepted iterate is a feasible path and the objective never
/// increases, so the reported action is an upper bound for the time-discrete
/// problem. Non-convergence is reported, never hidden.
SolveReport solve_wn(const GeometricGraph& g, const InterpolationFn& theta,
                     const DiscreteDensity& rho0, const DiscreteDensity& rho1,
                     const SolverOptions& options = {});

SolveReport solve_wn(const GeometricGraph& g, const InterpolationFn& theta,
                     const DiscreteDensity& rho0, const DiscreteDensity& rho1, int steps,
                     double tol);

class InfiniteDistanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Distance between the two point masses of the symmetric two-point space
/// (gamma = 1/2 each, edge weight `weight`, eps = 1). Throws
/// InfiniteDistanceError when C_theta is infinite.
double two_point_oracle(const InterpolationFn& theta, double quad_tol = 1e-10, double weight = 1.0);

struct DiameterEstimate {
  int nodes = 0;
  double estimate = 0.0;  // max of the two distances below
  double dirac_to_uniform = 0.0;
  double dirac_to_dirac = 0.0;
  bool converged = true;
};

/// Lower estimate of the diameter of the density space of the complete graph
/// K_N (uniform transition matrix 1/N, eps = 1). By symmetry one Dirac-to-uniform and one
/// Dirac-to-Dirac solve cover every such pair.
DiameterEstimate complete_graph_diameter(int nodes, const InterpolationFn& theta,
                                         const SolverOptions& options = {});

/// (1/N) sum f(rho_i) with f(r) = r log r, f(0) = 0.
double entropy_hnf(const DiscreteDensity& rho);

}  // namespace graphot
