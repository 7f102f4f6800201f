#include "graphot/discrete_ot.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace graphot {

DiscreteDensity::DiscreteDensity(Eigen::VectorXd values, double tol) : values_(std::move(values)) {
  if (values_.size() == 0) throw std::invalid_argument("DiscreteDensity: empty");
  for (Eigen::Index i = 0; i < values_.size(); ++i)
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
      throw std::invalid_argument("DiscreteDensity: value " + std::to_string(values_[i]) + " at node " +
                                  std::to_string(i) + " is negative or not finite");
  const double m = values_.mean();
  if (std::abs(m - 1.0) > tol)
    throw std::invalid_argument("DiscreteDensity: mass (1/n) sum = " + std::to_string(m) + " is not 1");
  // already-normalized input is kept bit for bit
  if (std::abs(m - 1.0) > 1e-13) values_ /= m;
}

DiscreteDensity DiscreteDensity::uniform(int n) { return DiscreteDensity(Eigen::VectorXd::Ones(n)); }

DiscreteDensity DiscreteDensity::dirac(int n, int i) {
  if (i < 0 || i >= n) throw std::invalid_argument("DiscreteDensity::dirac: node out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[i] = n;
  return DiscreteDensity(std::move(v));
}

namespace {

double edge_term(double v, double th) {
  if (v == 0.0) return 0.0;
  if (!(th > 0.0)) return kInfiniteAction;
  return v * v / th;
}

}  // namespace

double action(const GeometricGraph& g, const InterpolationFn& theta, const Eigen::VectorXd& rho,
              const EdgeField& v) {
  if (rho.size() != g.size()) throw std::invalid_argument("action: density size differs from graph");
  if (v.edge_count() != g.edge_count())
    throw std::invalid_argument("action: flux is not supported on the graph's edge set");
  double acc = 0.0;
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edges()[e];
    const double a = rho[ed.i], b = rho[ed.j];
    acc += ed.weight * (edge_term(v.forward[e], theta(a, b)) + edge_term(v.backward[e], theta(b, a)));
    if (std::isinf(acc)) return kInfiniteAction;
  }
  const double n = g.size();
  return acc / (n * n);
}

double path_action(const GeometricGraph& g, const InterpolationFn& theta, const TransportPath& path) {
  double total = 0.0;
  for (int k = 0; k < path.steps; ++k) total += path.dt() * action(g, theta, path.midpoint(k), path.fluxes[k]);
  return total;
}

double continuity_residual(const GeometricGraph& g, const TransportPath& path) {
  if (static_cast<int>(path.densities.size()) != path.steps + 1 ||
      static_cast<int>(path.fluxes.size()) != path.steps)
    throw std::invalid_argument("continuity_residual: malformed path");
  double worst = 0.0;
  for (int k = 0; k < path.steps; ++k) {
    const Eigen::VectorXd r =
        (path.densities[k + 1] - path.densities[k]) / path.dt() + divergence(g, path.fluxes[k]);
    if (r.size() > 0) worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

// Weighted Laplacian sum_e c_e (e_i - e_j)(e_i - e_j)^T with node 0 grounded.
// The sparsity pattern is fixed by the graph; only values change.
class GroundedLaplacian {
 public:
  explicit GroundedLaplacian(const GeometricGraph& g) : g_(g), n_(g.size()) {
    const int m = n_ - 1;
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < m; ++r) trip.emplace_back(r, r, 1.0);
    for (const auto& e : g.edges())
      if (e.i > 0 && e.j > 0) trip.emplace_back(std::max(e.i, e.j) - 1, std::min(e.i, e.j) - 1, 1.0);
    mat_.resize(m, m);
    mat_.setFromTriplets(trip.begin(), trip.end());
    mat_.makeCompressed();
    diag_pos_.resize(m);
    for (int r = 0; r < m; ++r) diag_pos_[r] = position(r, r);
    off_pos_.resize(g.edge_count(), -1);
    for (int e = 0; e < g.edge_count(); ++e) {
      const auto& ed = g.edges()[e];
      if (ed.i > 0 && ed.j > 0) off_pos_[e] = position(std::max(ed.i, ed.j) - 1, std::min(ed.i, ed.j) - 1);
    }
    if (m > 0) ldlt_.analyzePattern(mat_);
  }

  bool factorize(const Eigen::VectorXd& c) {
    if (n_ <= 1) return true;
    double* val = mat_.valuePtr();
    std::fill(val, val + mat_.nonZeros(), 0.0);
    for (int e = 0; e < g_.edge_count(); ++e) {
      const auto& ed = g_.edges()[e];
      if (ed.i > 0) val[diag_pos_[ed.i - 1]] += c[e];
      if (ed.j > 0) val[diag_pos_[ed.j - 1]] += c[e];
      if (off_pos_[e] >= 0) val[off_pos_[e]] -= c[e];
    }
    ldlt_.factorize(mat_);
    return ldlt_.info() == Eigen::Success;
  }

  /// Solves L psi = rhs with psi_0 = 0; rhs must sum to zero.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(n_);
    if (n_ > 1) psi.tail(n_ - 1) = ldlt_.solve(rhs.tail(n_ - 1));
    return psi;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& c, const Eigen::VectorXd& psi) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (int e = 0; e < g_.edge_count(); ++e) {
      const auto& ed = g_.edges()[e];
      const double f = c[e] * (psi[ed.i] - psi[ed.j]);
      out[ed.i] += f;
      out[ed.j] -= f;
    }
    return out;
  }

 private:
  int position(int row, int col) const {
    const int* outer = mat_.outerIndexPtr();
    const int* inner = mat_.innerIndexPtr();
    for (int p = outer[col]; p < outer[col + 1]; ++p)
      if (inner[p] == row) return p;
    throw std::logic_error("GroundedLaplacian: missing pattern entry");
  }

  const GeometricGraph& g_;
  int n_;
  Eigen::SparseMatrix<double> mat_;
  std::vector<int> diag_pos_;
  std::vector<int> off_pos_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// Lowest admissible fraction of the uniform density mixed into every
// interior slice; keeps edge weights of the slice Laplacians bounded away from 0.
constexpr double kFloorFraction = 1e-12;

// The action as a function of per-slice logits z_k (interior slices 1..T-1):
//   rho_k = n ((1 - floor) softmax(z_k) + floor / n)
//   J = sum_k (T eps^2 / 2) d_k^T L_k^+ d_k,  d_k = rho_{k+1} - rho_k,
// where L_k carries edge weights w_e theta(rho_bar_i, rho_bar_j).
class ReducedObjective {
 public:
  ReducedObjective(const GeometricGraph& g, const InterpolationFn& theta, const Eigen::VectorXd& rho0,
                   const Eigen::VectorXd& rho1, int steps)
      : g_(g), theta_(theta), rho0_(rho0), rho1_(rho1), steps_(steps), n_(g.size()), lap_(g) {}

  int variables() const { return (steps_ - 1) * n_; }

  std::vector<Eigen::VectorXd> densities(const Eigen::VectorXd& z, std::vector<Eigen::VectorXd>* probs = nullptr) const {
    std::vector<Eigen::VectorXd> rho(steps_ + 1);
    if (probs) probs->assign(steps_ + 1, Eigen::VectorXd());
    rho[0] = rho0_;
    rho[steps_] = rho1_;
    for (int k = 1; k < steps_; ++k) {
      const auto zk = z.segment((k - 1) * n_, n_);
      Eigen::VectorXd p = (zk.array() - zk.maxCoeff()).exp();
      p /= p.sum();
      rho[k] = n_ * (1.0 - kFloorFraction) * p.array() + kFloorFraction;
      if (probs) (*probs)[k] = std::move(p);
    }
    return rho;
  }

  static Eigen::VectorXd logits(const std::vector<Eigen::VectorXd>& rho, int n) {
    const int steps = static_cast<int>(rho.size()) - 1;
    Eigen::VectorXd z(std::max(0, (steps - 1) * n));
    for (int k = 1; k < steps; ++k)
      z.segment((k - 1) * n, n) = rho[k].array().max(1e-300).log();
    return z;
  }

  Eigen::VectorXd edge_theta(const Eigen::VectorXd& mid) const {
    Eigen::VectorXd th(g_.edge_count());
    for (int e = 0; e < g_.edge_count(); ++e)
      th[e] = theta_(mid[g_.edges()[e].i], mid[g_.edges()[e].j]);
    return th;
  }

  /// Objective value; fills `grad` (w.r.t. z) when non-null. Returns +inf if
  /// a slice Laplacian cannot be factorized.
  double evaluate(const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    std::vector<Eigen::VectorXd> probs;
    const auto rho = densities(z, &probs);
    const double c = steps_ * g_.eps() * g_.eps();
    double total = 0.0;
    std::vector<Eigen::VectorXd> g_rho;
    if (grad) g_rho.assign(steps_ + 1, Eigen::VectorXd::Zero(n_));
    Eigen::VectorXd weights(g_.edge_count());
    for (int k = 0; k < steps_; ++k) {
      const Eigen::VectorXd d = rho[k + 1] - rho[k];
      if (d.cwiseAbs().maxCoeff() == 0.0) continue;
      const Eigen::VectorXd mid = 0.5 * (rho[k] + rho[k + 1]);
      const Eigen::VectorXd th = edge_theta(mid);
      for (int e = 0; e < g_.edge_count(); ++e) weights[e] = g_.edges()[e].weight * th[e];
      if (!lap_.factorize(weights)) return kInfiniteAction;
      const Eigen::VectorXd psi = lap_.solve(d);
      const double jk = 0.5 * c * d.dot(psi);
      if (!std::isfinite(jk)) return kInfiniteAction;
      total += jk;
      if (!grad) continue;
      g_rho[k + 1] += c * psi;
      g_rho[k] -= c * psi;
      for (int e = 0; e < g_.edge_count(); ++e) {
        const auto& ed = g_.edges()[e];
        const double diff = psi[ed.i] - psi[ed.j];
        const double gt = -0.25 * c * ed.weight * diff * diff;  // half to each adjacent slice
        const double gi = gt * theta_.d_first(mid[ed.i], mid[ed.j]);
        const double gj = gt * theta_.d_first(mid[ed.j], mid[ed.i]);
        g_rho[k][ed.i] += gi;
        g_rho[k + 1][ed.i] += gi;
        g_rho[k][ed.j] += gj;
        g_rho[k + 1][ed.j] += gj;
      }
    }
    if (grad) {
      grad->resize(variables());
      for (int k = 1; k < steps_; ++k) {
        const Eigen::VectorXd& p = probs[k];
        const double avg = g_rho[k].dot(p);
        grad->segment((k - 1) * n_, n_) = n_ * (1.0 - kFloorFraction) * p.cwiseProduct(g_rho[k].array().matrix() - Eigen::VectorXd::Constant(n_, avg));
      }
    }
    return total;
  }

  /// Optimal fluxes for the densities of z, with one step of iterative refinement.
  TransportPath build_path(const std::vector<Eigen::VectorXd>& rho) {
    TransportPath path;
    path.steps = steps_;
    path.densities = rho;
    const double scale = 0.5 * n_ * g_.eps() * steps_;
    Eigen::VectorXd weights(g_.edge_count());
    for (int k = 0; k < steps_; ++k) {
      const Eigen::VectorXd d = rho[k + 1] - rho[k];
      const Eigen::VectorXd th = edge_theta(0.5 * (rho[k] + rho[k + 1]));
      Eigen::VectorXd v = Eigen::VectorXd::Zero(g_.edge_count());
      if (d.cwiseAbs().maxCoeff() > 0.0) {
        for (int e = 0; e < g_.edge_count(); ++e) weights[e] = g_.edges()[e].weight * th[e];
        if (!lap_.factorize(weights)) throw std::runtime_error("solve_wn: singular slice Laplacian");
        Eigen::VectorXd psi = lap_.solve(d);
        for (int pass = 0; pass < 2; ++pass) {
          Eigen::VectorXd r = d - lap_.apply(weights, psi);
          r.array() -= r.mean();
          psi += lap_.solve(r);
        }
        for (int e = 0; e < g_.edge_count(); ++e) {
          const auto& ed = g_.edges()[e];
          v[e] = -scale * th[e] * (psi[ed.i] - psi[ed.j]);
        }
      }
      path.fluxes.push_back(EdgeField::antisymmetric(std::move(v)));
    }
    return path;
  }

 private:
  const GeometricGraph& g_;
  const InterpolationFn& theta_;
  Eigen::VectorXd rho0_, rho1_;
  int steps_;
  int n_;
  GroundedLaplacian lap_;
};

}  // namespace

TransportPath initial_path(const GeometricGraph& g, const DiscreteDensity& rho0,
                           const DiscreteDensity& rho1, int steps) {
  if (steps < 1) throw std::invalid_argument("initial_path: need at least one time step");
  if (rho0.size() != g.size() || rho1.size() != g.size())
    throw std::invalid_argument("initial_path: density size differs from graph");
  g.require_connected("initial_path");
  TransportPath path;
  path.steps = steps;
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    path.densities.push_back((1.0 - t) * rho0.values() + t * rho1.values());
  }
  // Lap_n = (2 / (n eps^2)) L_w, so solve L_w phi = (n eps^2 / 2)(rho1 - rho0)
  GroundedLaplacian lap(g);
  Eigen::VectorXd w(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) w[e] = g.edges()[e].weight;
  Eigen::VectorXd rhs = 0.5 * g.size() * g.eps() * g.eps() * (rho1.values() - rho0.values());
  rhs.array() -= rhs.mean();
  EdgeField flux(g.edge_count(), true);
  if (g.size() > 1 && rhs.cwiseAbs().maxCoeff() > 0.0) {
    if (!lap.factorize(w)) throw std::runtime_error("initial_path: singular Laplacian");
    Eigen::VectorXd phi = lap.solve(rhs);
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd r = rhs - lap.apply(w, phi);
      r.array() -= r.mean();
      phi += lap.solve(r);
    }
    flux = gradient(g, phi);
  }
  path.fluxes.assign(steps, flux);
  return path;
}

namespace {

struct LbfgsMemory {
  std::deque<Eigen::VectorXd> s, y;
  std::deque<double> rho;

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }

  Eigen::VectorXd direction(const Eigen::VectorXd& grad) const {
    Eigen::VectorXd q = -grad;
    const int m = static_cast<int>(s.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho[i] * s[i].dot(q);
      q -= alpha[i] * y[i];
    }
    if (m > 0) q *= s.back().dot(y.back()) / y.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double beta = rho[i] * y[i].dot(q);
      q += (alpha[i] - beta) * s[i];
    }
    return q;
  }
};

}  // namespace

SolveReport solve_wn(const GeometricGraph& g, const InterpolationFn& theta, const DiscreteDensity& rho0,
                     const DiscreteDensity& rho1, const SolverOptions& options) {
  const int n = g.size();
  const int steps = options.steps;
  if (steps < 1) throw std::invalid_argument("solve_wn: need at least one time step");
  if (rho0.size() != n || rho1.size() != n)
    throw std::invalid_argument("solve_wn: density size differs from graph");
  g.require_connected("solve_wn");

  SolveReport report;
  report.steps = steps;
  report.theta = theta.name();

  ReducedObjective objective(g, theta, rho0.values(), rho1.values(), steps);

  // linear interpolation mixed with a little of the uniform density so every
  // interior slice starts strictly positive
  std::vector<Eigen::VectorXd> start(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    start[k] = (1.0 - t) * rho0.values() + t * rho1.values();
    if (k > 0 && k < steps) start[k] = (1.0 - 1e-3) * start[k].array() + 1e-3;
  }
  Eigen::VectorXd z = ReducedObjective::logits(start, n);
  Eigen::VectorXd grad;
  double f = objective.evaluate(z, &grad);
  if (!std::isfinite(f))
    throw std::runtime_error("solve_wn: starting path has infinite action");
  report.objective_history.push_back(f);

  LbfgsMemory mem;
  int iter = 0;
  bool stalled = false;
  const double tiny = std::numeric_limits<double>::min();
  for (; iter < options.max_iter && objective.variables() > 0; ++iter) {
    if (f <= tiny) {
      report.converged = true;
      break;
    }
    const auto& hist = report.objective_history;
    if (static_cast<int>(hist.size()) > options.window) {
      const double improve = hist[hist.size() - 1 - options.window] - f;
      if (improve <= options.rel_tol * f) {
        report.converged = true;
        break;
      }
    }
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + f)) {
      report.converged = true;
      break;
    }

    Eigen::VectorXd d = mem.direction(grad);
    double slope = grad.dot(d);
    if (!(slope < 0.0)) {
      mem.clear();
      d = -grad;
      slope = grad.dot(d);
    }
    double step = mem.s.empty() ? std::min(1.0, 1.0 / grad.lpNorm<Eigen::Infinity>()) : 1.0;

    Eigen::VectorXd z_new, grad_new;
    double f_new = kInfiniteAction;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      z_new = z + step * d;
      f_new = objective.evaluate(z_new, &grad_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || !(f_new <= f)) {
      if (!mem.s.empty()) {
        mem.clear();
        --iter;
        continue;
      }
      stalled = true;
      break;
    }
    Eigen::VectorXd s = z_new - z;
    Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      mem.s.push_back(std::move(s));
      mem.y.push_back(std::move(y));
      mem.rho.push_back(1.0 / sy);
      if (static_cast<int>(mem.s.size()) > options.memory) {
        mem.s.pop_front();
        mem.y.pop_front();
        mem.rho.pop_front();
      }
    }
    z = std::move(z_new);
    grad = std::move(grad_new);
    f = f_new;
    report.objective_history.push_back(f);
  }
  if (objective.variables() == 0) report.converged = true;

  const auto& hist = report.objective_history;
  const size_t back = std::min<size_t>(hist.size() - 1, options.window);
  report.gap_estimate = f > 0.0 ? (hist[hist.size() - 1 - back] - f) / f : 0.0;
  report.iterations = iter;

  report.path = objective.build_path(objective.densities(z));
  report.action = path_action(g, theta, report.path);
  report.distance_upper = std::sqrt(report.action);
  report.feas_residual = continuity_residual(g, report.path);

  std::ostringstream diag;
  if (stalled) diag << "line search stalled; ";
  if (!report.converged && !stalled) diag << "max_iter reached; ";
  if (report.feas_residual > options.feas_tol) {
    diag << "continuity residual " << report.feas_residual << " exceeds " << options.feas_tol << "; ";
    report.converged = false;
  }
  if (stalled && report.gap_estimate <= options.rel_tol) report.converged = true;
  report.diagnostic = diag.str();
  return report;
}

SolveReport solve_wn(const GeometricGraph& g, const InterpolationFn& theta, const DiscreteDensity& rho0,
                     const DiscreteDensity& rho1, int steps, double tol) {
  SolverOptions opt;
  opt.steps = steps;
  opt.rel_tol = tol;
  return solve_wn(g, theta, rho0, rho1, opt);
}

double two_point_oracle(const InterpolationFn& theta, double quad_tol, double weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("two_point_oracle: weight must be positive");
  // Nodes a, b with gamma = 1/2 each and densities (1 - g, 1 + g). An
  // antisymmetric flux v on the edge gives div V(a) = v w, hence g' = v w,
  // and A = v^2 w / (2 theta(1 - g, 1 + g)) = g'^2 / (2 w theta).
  // Minimizing int_0^1 g'^2 / h(g) dt from g = -1 to 1 gives
  // (int_{-1}^{1} dg / sqrt(h))^2, so
  //   W = (1 / sqrt(2 w)) int_{-1}^{1} dg / sqrt(theta(1 - g, 1 + g)).
  // With g = 2t - 1 and 1-homogeneity the integral equals sqrt(2) C_theta,
  // which leaves W = C_theta / sqrt(w).
  double c;
  try {
    c = c_theta(theta, quad_tol);
  } catch (const InfiniteCThetaError& err) {
    throw InfiniteDistanceError(std::string("two-point distance infinite: ") + err.what());
  }
  return c / std::sqrt(weight);
}

DiameterEstimate complete_graph_diameter(int nodes, const InterpolationFn& theta,
                                         const SolverOptions& options) {
  if (nodes < 1) throw std::invalid_argument("complete_graph_diameter: need at least one node");
  DiameterEstimate out;
  out.nodes = nodes;
  if (nodes == 1) return out;
  const GeometricGraph g = GeometricGraph::complete(nodes);
  const auto a = DiscreteDensity::dirac(nodes, 0);
  const auto du = solve_wn(g, theta, a, DiscreteDensity::uniform(nodes), options);
  const auto dd = solve_wn(g, theta, a, DiscreteDensity::dirac(nodes, 1), options);
  out.dirac_to_uniform = du.distance_upper;
  out.dirac_to_dirac = dd.distance_upper;
  out.estimate = std::max(out.dirac_to_uniform, out.dirac_to_dirac);
  out.converged = du.converged && dd.converged;
  return out;
}

double entropy_hnf(const DiscreteDensity& rho) {
  double acc = 0.0;
  for (int i = 0; i < rho.size(); ++i) {
    const double r = rho[i];
    if (r > 0.0) acc += r * std::log(r);
  }
  return acc / rho.size();
}

}  // namespace graphot
