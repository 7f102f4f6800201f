#include "graphot/experiments.hpp"

#include "graphot/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace graphot {

double EpsRule::at(int n) const { return c * std::pow(static_cast<double>(n), -beta); }

void ExperimentConfig::validate() const {
  if (d < 1) throw ConfigError("config: d must be >= 1");
  if (n_list.empty()) throw ConfigError("config: n_list is empty");
  for (int n : n_list)
    if (n < 2) throw ConfigError("config: every n in n_list must be >= 2");
  if (!(eps_rule.c > 0.0)) throw ConfigError("config: eps_rule.c must be positive");
  if (!(eps_rule.beta > 0.0 && eps_rule.beta < 1.0 / d))
    throw ConfigError("config: eps_rule.beta must lie in (0, 1/d) so that delta_n / eps_n -> 0");
  if (theta != "arithmetic" && theta != "logarithmic")
    throw ConfigError("config: theta must be arithmetic or logarithmic");
  if (!(s > 0.0)) throw ConfigError("config: s must be positive");
  if (T < 1) throw ConfigError("config: T must be >= 1");
  if (pairs < 0) throw ConfigError("config: pairs must be >= 0");
  if (max_atoms < 1) throw ConfigError("config: max_atoms must be >= 1");
  if (refinement < 1) throw ConfigError("config: refinement must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("config: tol must be positive");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    cfg.d = j.value("d", cfg.d);
    cfg.n_list = j.at("n_list").get<std::vector<int>>();
    if (j.contains("eps_rule")) {
      const auto& r = j.at("eps_rule");
      cfg.eps_rule.c = r.at("c").get<double>();
      cfg.eps_rule.beta = r.at("beta").get<double>();
    }
    cfg.theta = j.value("theta", cfg.theta);
    cfg.s = j.value("s", cfg.s);
    cfg.T = j.value("T", cfg.T);
    cfg.pairs = j.value("pairs", cfg.pairs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output = j.value("output", cfg.output);
    cfg.max_atoms = j.value("max_atoms", cfg.max_atoms);
    cfg.refinement = j.value("refinement", cfg.refinement);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.reference_kappa = j.value("reference_kappa", cfg.reference_kappa);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"d", d},
          {"n_list", n_list},
          {"eps_rule", {{"c", eps_rule.c}, {"beta", eps_rule.beta}}},
          {"theta", theta},
          {"s", s},
          {"T", T},
          {"pairs", pairs},
          {"seed", seed},
          {"output", output},
          {"max_atoms", max_atoms},
          {"refinement", refinement},
          {"tol", tol},
          {"reference_kappa", reference_kappa}};
}

double alpha_sigma(int d) {
  if (d < 1) throw std::invalid_argument("alpha_sigma: d must be >= 1");
  const double alpha = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
  return alpha / (d + 2);
}

namespace {

struct BallRule {
  std::vector<Eigen::VectorXd> nodes;  // displacements
  std::vector<double> weights;
};

// tensor Gauss-Legendre rule on the ball of radius eps in R^d (d <= 3)
BallRule ball_rule(int d, double eps, int q) {
  const GaussRule g = gauss_legendre(q);
  BallRule rule;
  auto radial = [&](auto&& emit) {
    for (int a = 0; a < q; ++a) {
      const double r = 0.5 * eps * (g.nodes[a] + 1.0);
      emit(r, 0.5 * eps * g.weights[a]);
    }
  };
  auto angle = [&](int b) { return std::numbers::pi * (g.nodes[b] + 1.0); };
  const double wa = std::numbers::pi;  // d(phi) = pi d(node)
  if (d == 1) {
    radial([&](double r, double w) {
      for (double sgn : {-1.0, 1.0}) {
        rule.nodes.push_back(Eigen::VectorXd::Constant(1, sgn * r));
        rule.weights.push_back(w);
      }
    });
  } else if (d == 2) {
    radial([&](double r, double w) {
      for (int b = 0; b < q; ++b) {
        Eigen::VectorXd z(2);
        z << r * std::cos(angle(b)), r * std::sin(angle(b));
        rule.nodes.push_back(z);
        rule.weights.push_back(w * r * wa * g.weights[b]);
      }
    });
  } else if (d == 3) {
    radial([&](double r, double w) {
      for (int b = 0; b < q; ++b) {
        const double ct = g.nodes[b], st = std::sqrt(1.0 - ct * ct);
        for (int c = 0; c < q; ++c) {
          Eigen::VectorXd z(3);
          z << r * st * std::cos(angle(c)), r * st * std::sin(angle(c)), r * ct;
          rule.nodes.push_back(z);
          rule.weights.push_back(w * r * r * g.weights[b] * wa * g.weights[c]);
        }
      }
    });
  } else {
    throw std::invalid_argument("kernel_moment_check: supported for d = 1, 2, 3");
  }
  return rule;
}

}  // namespace

MomentCheck kernel_moment_check(int d, double eps, int quad_points, int directions, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("kernel_moment_check: eps must lie in (0, 1/2)");
  if (quad_points < 2 || directions < 1) throw std::invalid_argument("kernel_moment_check: bad rule size");
  MomentCheck out;
  out.d = d;
  out.eps = eps;
  out.expected = alpha_sigma(d);
  const BallRule rule = ball_rule(d, eps, quad_points);
  Rng rng(seed, 0x6d6f6d656e74ULL);

  std::vector<Eigen::VectorXd> dirs;
  for (int k = 0; k < std::min(d, directions); ++k) dirs.push_back(Eigen::VectorXd::Unit(d, k));
  while (static_cast<int>(dirs.size()) < directions) {
    Eigen::VectorXd u(d);
    for (int k = 0; k < d; ++k) u[k] = rng.uniform() - 0.5;
    if (u.norm() > 1e-3) dirs.push_back(u.normalized());
  }
  std::vector<TorusPoint> bases;
  for (int b = 0; b < 2; ++b) {
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x[k] = rng.uniform();
    bases.emplace_back(std::move(x));
  }

  const double w_eps = std::pow(eps, -d);
  for (const auto& u : dirs) {
    double at_base[2] = {0.0, 0.0};
    Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
    for (int b = 0; b < 2; ++b) {
      const TorusPoint& x = bases[b];
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const TorusPoint y(x.coords() + rule.nodes[q]);
        const Eigen::VectorXd disp = torus_displacement(x, y) / eps;
        const double kernel = w_eps * indicator_kernel(disp.norm());
        const double proj = disp.dot(u);
        at_base[b] += rule.weights[q] * proj * proj * kernel;
        if (b == 0) first += rule.weights[q] * proj * kernel * disp;
      }
    }
    out.second_moments.push_back(at_base[0]);
    out.max_rel_error = std::max(out.max_rel_error, std::abs(at_base[0] - out.expected) / out.expected);
    out.position_spread = std::max(out.position_spread, std::abs(at_base[0] - at_base[1]));
    out.first_moment_error =
        std::max(out.first_moment_error, (first - out.expected * u).norm() / out.expected);
  }
  return out;
}

AtomicMeasure random_dirac_mixture(int d, int max_atoms, Rng& rng) {
  const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_atoms)));
  std::vector<TorusPoint> atoms;
  std::vector<double> masses;
  double total = 0.0;
  for (int a = 0; a < k; ++a) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform();
    atoms.emplace_back(std::move(x));
    masses.push_back(0.1 + rng.uniform());
    total += masses.back();
  }
  for (double& m : masses) m /= total;
  return AtomicMeasure(std::move(atoms), std::move(masses));
}

namespace {

int auto_reference_kappa(int d) {
  int k = 1;
  while (std::pow(k + 1.0, d) <= 256.0) ++k;
  return k;
}

// order-free mean: sort first so any permutation of the inputs gives the same bits
double sorted_mean(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

std::uint64_t cloud_seed(std::uint64_t seed, int n) { return Rng(seed, static_cast<std::uint64_t>(n)).key(); }

}  // namespace

DistortionReport run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const InterpolationFn theta = InterpolationFn::from_name(cfg.theta);
  const double scale = std::sqrt(alpha_sigma(cfg.d));
  SolverOptions opt;
  opt.steps = cfg.T;
  opt.rel_tol = cfg.tol;

  DistortionReport report;
  for (int n : cfg.n_list) {
    const PointCloud cloud = sample_uniform(n, cfg.d, cloud_seed(cfg.seed, n));
    DistortionSummary sum;
    sum.n = n;
    sum.eps_n = cfg.eps_rule.at(n);
    sum.smoothing_bias = std::sqrt(2.0 * cfg.d * cfg.s);
    const GeometricGraph g = build_graph(cloud, sum.eps_n);
    if (!g.connected())
      throw ConfigError("config: eps_rule gives a disconnected graph at n = " + std::to_string(n));
    const DeltaEstimate de = estimate_delta_n(cloud, default_refinement_kappa(n, cfg.d, cfg.refinement));
    sum.delta_n = de.delta;
    sum.grid_spacing = de.spacing;
    sum.lambda_n = smallest_nontrivial_eigenvalue(g).value;
    sum.diam_nodes = std::max(2, static_cast<int>(std::lround(n * std::pow(sum.eps_n, cfg.d))));
    sum.diam_est = complete_graph_diameter(sum.diam_nodes, theta, opt).estimate;

    const int ref_kappa = cfg.reference_kappa == 0 ? auto_reference_kappa(cfg.d) : cfg.reference_kappa;
    std::vector<double> ratios, ratios_smoothed, errors;
    for (int p = 0; p < cfg.pairs; ++p) {
      Rng rng = Rng(cfg.seed, static_cast<std::uint64_t>(n)).split(static_cast<std::uint64_t>(p) + 1);
      const AtomicMeasure mu = random_dirac_mixture(cfg.d, cfg.max_atoms, rng);
      const AtomicMeasure nu = random_dirac_mixture(cfg.d, cfg.max_atoms, rng);
      DistortionRow row;
      row.n = n;
      row.pair = p;
      row.seed = cfg.seed;
      row.eps = sum.eps_n;
      row.T = cfg.T;
      row.theta = cfg.theta;
      row.s = cfg.s;
      row.w_continuum = wasserstein2(mu, nu);
      const SolveReport sol =
          solve_wn(g, theta, f_map(mu, cfg.s, de.partition), f_map(nu, cfg.s, de.partition), opt);
      row.iterations = sol.iterations;
      row.converged = sol.converged;
      row.w_discrete = sol.distance_upper;
      row.gap_estimate = sol.gap_estimate;
      row.feas_residual = sol.feas_residual;
      row.ratio = row.w_continuum > 0.0 ? row.w_discrete * scale / row.w_continuum
                                        : std::numeric_limits<double>::quiet_NaN();
      row.scaled_abs_error = std::abs(row.w_discrete - row.w_continuum / scale);
      if (ref_kappa > 0) {
        row.w_smoothed = wasserstein2(heat_smooth(mu, cfg.s, ref_kappa).to_atomic(),
                                      heat_smooth(nu, cfg.s, ref_kappa).to_atomic());
        row.ratio_smoothed = row.w_smoothed > 0.0 ? row.w_discrete * scale / row.w_smoothed
                                                  : std::numeric_limits<double>::quiet_NaN();
      } else {
        row.w_smoothed = row.ratio_smoothed = std::numeric_limits<double>::quiet_NaN();
      }
      ++report.attempted;
      if (!row.converged) {
        ++report.failures;
        ++sum.failures;
      } else {
        ++sum.pairs_used;
        errors.push_back(row.scaled_abs_error);
        if (std::isfinite(row.ratio)) ratios.push_back(row.ratio);
        if (std::isfinite(row.ratio_smoothed)) ratios_smoothed.push_back(row.ratio_smoothed);
      }
      report.rows.push_back(std::move(row));
    }
    sum.sup_distortion = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
    sum.mean_ratio = sorted_mean(ratios);
    sum.mean_ratio_smoothed = sorted_mean(ratios_smoothed);
    report.summary.push_back(sum);
  }
  return report;
}

void write_rows_csv(std::ostream& out, const DistortionReport& report) {
  out << std::setprecision(17);
  out << "n,pair,seed,eps,T,theta,s,iterations,converged,w_continuum,w_discrete,ratio,scaled_abs_error,"
         "gap_estimate,feas_residual,w_smoothed,ratio_smoothed\n";
  for (const auto& r : report.rows)
    out << r.n << "," << r.pair << "," << r.seed << "," << r.eps << "," << r.T << "," << r.theta << "," << r.s
        << "," << r.iterations << "," << (r.converged ? 1 : 0) << "," << r.w_continuum << "," << r.w_discrete
        << "," << r.ratio << "," << r.scaled_abs_error << "," << r.gap_estimate << "," << r.feas_residual << ","
        << r.w_smoothed << "," << r.ratio_smoothed << "\n";
}

nlohmann::json summary_to_json(const DistortionReport& report, const ExperimentConfig& cfg) {
  auto per_n = nlohmann::json::array();
  for (const auto& s : report.summary)
    per_n.push_back({{"n", s.n},
                     {"eps_n", s.eps_n},
                     {"delta_n", s.delta_n},
                     {"grid_spacing", s.grid_spacing},
                     {"lambda_n", s.lambda_n},
                     {"diam_nodes", s.diam_nodes},
                     {"diam_est", s.diam_est},
                     {"smoothing_bias", s.smoothing_bias},
                     {"sup_distortion", s.sup_distortion},
                     {"mean_ratio", s.mean_ratio},
                     {"mean_ratio_smoothed", s.mean_ratio_smoothed},
                     {"pairs_used", s.pairs_used},
                     {"failures", s.failures}});
  return {{"config", cfg.to_json()},
          {"alpha_sigma", alpha_sigma(cfg.d)},
          {"attempted", report.attempted},
          {"failures", report.failures},
          {"summary", per_n}};
}

DiameterTable run_diameter_study(const std::vector<int>& N_list, const InterpolationFn& theta,
                                 const SolverOptions& options) {
  DiameterTable table;
  table.theta = theta.name();
  double num = 0.0, den = 0.0;
  for (int N : N_list) {
    const DiameterEstimate est = complete_graph_diameter(N, theta, options);
    DiameterRow row;
    row.N = N;
    row.estimate = est.estimate;
    row.dirac_to_uniform = est.dirac_to_uniform;
    row.dirac_to_dirac = est.dirac_to_dirac;
    row.converged = est.converged;
    if (N >= 2) {
      const double x = std::sqrt(std::log(static_cast<double>(N)));
      num += est.estimate * x;
      den += x * x;
    }
    table.rows.push_back(row);
  }
  table.coefficient = den > 0.0 ? num / den : 0.0;
  for (auto& row : table.rows) {
    row.fit = table.coefficient * std::sqrt(std::log(static_cast<double>(std::max(row.N, 1))));
    row.residual = row.fit > 0.0 ? (row.estimate - row.fit) / row.fit : 0.0;
  }
  return table;
}

std::vector<EigenRow> run_eigen_study(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<EigenRow> rows;
  for (int n : cfg.n_list) {
    const PointCloud cloud = sample_uniform(n, cfg.d, cloud_seed(cfg.seed, n));
    EigenRow row;
    row.n = n;
    row.eps = cfg.eps_rule.at(n);
    const GeometricGraph g = build_graph(cloud, row.eps);
    if (!g.connected())
      throw ConfigError("config: eps_rule gives a disconnected graph at n = " + std::to_string(n));
    const EigenPair ep = smallest_nontrivial_eigenvalue(g, 1e-8, cfg.seed);
    row.lambda = ep.value;
    row.residual = ep.residual;
    row.iterations = ep.iterations;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace graphot
