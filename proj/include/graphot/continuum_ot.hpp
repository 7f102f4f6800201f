#pragma once

// Continuum side: atomic measures and grid densities on the torus, exact W2
// between atomic measures, infinity-OT matchings, heat smoothing, and the maps
// P_n (discrete -> grid), Q_n (measure -> discrete) and F_n = Q_n o H_s.

#include "graphot/discrete_ot.hpp"
#include "graphot/torus.hpp"
#include "graphot/transport_simplex.hpp"

#include <Eigen/Core>

#include <vector>

namespace graphot {

/// Finitely supported probability measure on T^d.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  /// Masses must be >= 0 and sum to 1 within 1e-12.
  AtomicMeasure(std::vector<TorusPoint> atoms, std::vector<double> masses);
  /// Mass 1/k on each of the k points.
  static AtomicMeasure uniform(std::vector<TorusPoint> points);
  static AtomicMeasure dirac(const TorusPoint& x);

  int size() const { return static_cast<int>(atoms_.size()); }
  int dim() const { return atoms_.empty() ? 0 : atoms_.front().dim(); }
  const std::vector<TorusPoint>& atoms() const { return atoms_; }
  const std::vector<double>& masses() const { return masses_; }

 private:
  std::vector<TorusPoint> atoms_;
  std::vector<double> masses_;
};

/// Density w.r.t. Lebesgue measure sampled at the kappa^d points of
/// regular_grid(kappa, d); values >= 0 with mean 1.
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(int kappa, int dim, Eigen::VectorXd values, double tol = 1e-12);

  int kappa() const { return kappa_; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(values_.size()); }
  double spacing() const { return 1.0 / kappa_; }
  const Eigen::VectorXd& values() const { return values_; }
  TorusPoint point(int m) const;
  /// One atom per cell at the grid point, with mass value / kappa^d.
  AtomicMeasure to_atomic() const;

 private:
  int kappa_ = 0;
  int dim_ = 0;
  Eigen::VectorXd values_;
};

/// Index of the grid point of regular_grid(kappa, d) nearest to x.
int nearest_grid_index(const TorusPoint& x, int kappa);

/// sqrt of the optimal transport cost with cost torus_distance^2.
/// Throws UnbalancedMassError on unequal masses and std::runtime_error when
/// the optimality audit fails.
double wasserstein2(const AtomicMeasure& mu, const AtomicMeasure& nu);
TransportPlan wasserstein2_plan(const AtomicMeasure& mu, const AtomicMeasure& nu);

struct BottleneckMatching {
  std::vector<int> assignment;  // source atom -> target atom
  double delta = 0.0;
};

/// d_inf between two uniform measures with the same number of atoms.
BottleneckMatching bottleneck_dinf(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Approximate cells U_i: each of the M = kappa^d fine-grid points belongs to
/// one cloud point, exactly M / n per cloud point.
struct PartitionMap {
  int kappa = 0;
  int dim = 0;
  int nodes = 0;
  std::vector<int> owner;  // grid point -> cloud point
  double cell_radius = 0.0;

  int per_cell() const { return static_cast<int>(owner.size()) / nodes; }
  double spacing() const { return 1.0 / kappa; }
};

struct DeltaEstimate {
  double delta = 0.0;    // bottleneck distance grid -> cloud
  double spacing = 0.0;  // grid spacing 1/kappa
  PartitionMap partition;
};

/// Smallest kappa with kappa^d >= factor * n and kappa^d divisible by n.
int default_refinement_kappa(int n, int dim, int factor = 16);

/// delta_n from the balanced bottleneck assignment of regular_grid(kappa, d)
/// to the cloud. kappa <= 0 picks default_refinement_kappa.
DeltaEstimate estimate_delta_n(const PointCloud& cloud, int kappa = 0);

/// rho(x) = rho_n(x_i) on U_i.
GridDensity pn_project(const DiscreteDensity& rho, const PartitionMap& part);

/// rho_n(x_i) = n mu(U_i).
DiscreteDensity qn_project(const GridDensity& rho, const PartitionMap& part);
/// Atoms are placed in the cell of their nearest grid point.
DiscreteDensity qn_project(const AtomicMeasure& mu, const PartitionMap& part);

/// Number of periodic images per axis so the dropped lattice terms sum below `tail`.
int heat_truncation(double s, double tail = 1e-12);

/// Heat-smoothed density of mu sampled on regular_grid(kappa, d), using the
/// wrapped kernel (4 pi s)^{-d/2} exp(-|u|^2 / 4s), renormalized to mean 1.
/// truncation < 0 picks heat_truncation(s).
GridDensity heat_smooth(const AtomicMeasure& mu, double s, int kappa, int truncation = -1);

/// F_n(mu) = Q_n(H_s mu) on the partition's grid.
DiscreteDensity f_map(const AtomicMeasure& mu, double s, const PartitionMap& part);

}  // namespace graphot
