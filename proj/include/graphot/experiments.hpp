#pragma once

// Experiment drivers: distortion of F_n across n, complete-graph diameters,
// spectral gaps, and the kernel moment constant alpha_d sigma_eta.

#include "graphot/continuum_ot.hpp"
#include "graphot/discrete_ot.hpp"
#include "graphot/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphot {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// eps_n = c * n^{-beta}
struct EpsRule {
  double c = 1.0;
  double beta = 0.25;
  double at(int n) const;
};

struct ExperimentConfig {
  int d = 1;
  std::vector<int> n_list;
  EpsRule eps_rule;
  std::string theta = "logarithmic";
  double s = 0.02;
  int T = 32;
  int pairs = 10;
  std::uint64_t seed = 0;
  std::string output;
  // not part of the scaling law; exposed for reproducibility
  int max_atoms = 5;
  int refinement = 16;        // fine grid has >= refinement * n points
  double tol = 1e-6;          // solver relative tolerance
  int reference_kappa = 0;    // grid for the smoothed-measure reference W; 0 = auto, -1 = off

  /// Throws ConfigError naming the offending field.
  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct DistortionRow {
  int n = 0;
  int pair = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  int T = 0;
  std::string theta;
  double s = 0.0;
  int iterations = 0;
  bool converged = false;
  double w_continuum = 0.0;
  double w_discrete = 0.0;
  double ratio = 0.0;  // w_discrete * sqrt(alpha sigma) / w_continuum
  double scaled_abs_error = 0.0;
  double gap_estimate = 0.0;
  double feas_residual = 0.0;
  // W between the heat-smoothed measures, NaN when not computed
  double w_smoothed = 0.0;
  double ratio_smoothed = 0.0;
};

struct DistortionSummary {
  int n = 0;
  double eps_n = 0.0;
  double delta_n = 0.0;
  double grid_spacing = 0.0;
  double lambda_n = 0.0;
  int diam_nodes = 0;
  double diam_est = 0.0;
  double smoothing_bias = 0.0;  // sqrt(2 d s)
  double sup_distortion = 0.0;
  double mean_ratio = 0.0;
  double mean_ratio_smoothed = 0.0;
  int pairs_used = 0;
  int failures = 0;
};

struct DistortionReport {
  std::vector<DistortionRow> rows;
  std::vector<DistortionSummary> summary;
  int attempted = 0;
  int failures = 0;
  bool excessive_failures() const { return attempted > 0 && failures * 10 > attempted; }
};

/// alpha_d * sigma_eta for the indicator kernel: |B_1| / (d + 2).
double alpha_sigma(int d);

struct MomentCheck {
  int d = 0;
  double eps = 0.0;
  double expected = 0.0;
  std::vector<double> second_moments;  // one per direction u
  double max_rel_error = 0.0;
  double first_moment_error = 0.0;  // |int ((y-x).u/eps)(y-x)/eps w dy - alpha sigma u| / alpha sigma
  double position_spread = 0.0;     // max difference between the two base points
};

/// Integrates ((y - x).u / eps)^2 w_eps(x, y) dy over the eps-ball with tensor
/// Gauss-Legendre rules in polar/spherical coordinates, for `directions`
/// random unit vectors u (the coordinate axes first) and two base points x.
MomentCheck kernel_moment_check(int d, double eps, int quad_points = 24, int directions = 2,
                                std::uint64_t seed = 0);

/// Random Dirac mixture with 1..max_atoms atoms.
AtomicMeasure random_dirac_mixture(int d, int max_atoms, Rng& rng);

DistortionReport run_convergence(const ExperimentConfig& cfg);

void write_rows_csv(std::ostream& out, const DistortionReport& report);
nlohmann::json summary_to_json(const DistortionReport& report, const ExperimentConfig& cfg);

struct DiameterRow {
  int N = 0;
  double estimate = 0.0;
  double dirac_to_uniform = 0.0;
  double dirac_to_dirac = 0.0;
  double fit = 0.0;
  double residual = 0.0;  // (estimate - fit) / fit
  bool converged = true;
};

struct DiameterTable {
  std::string theta;
  double coefficient = 0.0;  // a in a * sqrt(log N)
  std::vector<DiameterRow> rows;
};

/// Least-squares fit over the rows with N >= 2.
DiameterTable run_diameter_study(const std::vector<int>& N_list, const InterpolationFn& theta,
                                 const SolverOptions& options = {});

struct EigenRow {
  int n = 0;
  double eps = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

std::vector<EigenRow> run_eigen_study(const ExperimentConfig& cfg);

}  // namespace graphot
