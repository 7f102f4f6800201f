#include "graphot/continuum_ot.hpp"

#include "graphot/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace graphot {

AtomicMeasure::AtomicMeasure(std::vector<TorusPoint> atoms, std::vector<double> masses)
    : atoms_(std::move(atoms)), masses_(std::move(masses)) {
  if (atoms_.size() != masses_.size())
    throw std::invalid_argument("AtomicMeasure: atom and mass counts differ");
  if (atoms_.empty()) throw std::invalid_argument("AtomicMeasure: no atoms");
  double total = 0.0;
  for (size_t a = 0; a < atoms_.size(); ++a) {
    if (atoms_[a].dim() != atoms_.front().dim())
      throw std::invalid_argument("AtomicMeasure: atoms of different dimension");
    if (!(masses_[a] >= 0.0)) throw std::invalid_argument("AtomicMeasure: negative mass");
    total += masses_[a];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("AtomicMeasure: masses sum to " + std::to_string(total) + ", not 1");
}

AtomicMeasure AtomicMeasure::uniform(std::vector<TorusPoint> points) {
  const size_t k = points.size();
  return AtomicMeasure(std::move(points), std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

AtomicMeasure AtomicMeasure::dirac(const TorusPoint& x) { return AtomicMeasure({x}, {1.0}); }

GridDensity::GridDensity(int kappa, int dim, Eigen::VectorXd values, double tol)
    : kappa_(kappa), dim_(dim), values_(std::move(values)) {
  if (kappa < 1 || dim < 1) throw std::invalid_argument("GridDensity: kappa and dim must be positive");
  const double expect = std::pow(static_cast<double>(kappa), dim);
  if (static_cast<double>(values_.size()) != expect)
    throw std::invalid_argument("GridDensity: expected kappa^d values");
  if ((values_.array() < 0.0).any()) throw std::invalid_argument("GridDensity: negative value");
  if (std::abs(values_.mean() - 1.0) > tol)
    throw std::invalid_argument("GridDensity: mean " + std::to_string(values_.mean()) + " is not 1");
}

TorusPoint GridDensity::point(int m) const {
  Eigen::VectorXd x(dim_);
  for (int k = dim_ - 1; k >= 0; --k) {
    x[k] = static_cast<double>(m % kappa_) / kappa_;
    m /= kappa_;
  }
  return TorusPoint(std::move(x));
}

AtomicMeasure GridDensity::to_atomic() const {
  std::vector<TorusPoint> atoms;
  std::vector<double> masses;
  atoms.reserve(size());
  masses.reserve(size());
  const double cell = 1.0 / size();
  for (int m = 0; m < size(); ++m) {
    atoms.push_back(point(m));
    masses.push_back(values_[m] * cell);
  }
  // absorb the rounding of the sum so the total is 1 to the last bits
  double total = 0.0;
  for (double v : masses) total += v;
  for (double& v : masses) v /= total;
  return AtomicMeasure(std::move(atoms), std::move(masses));
}

int nearest_grid_index(const TorusPoint& x, int kappa) {
  int m = 0;
  for (int k = 0; k < x.dim(); ++k) {
    long i = std::lround(x[k] * kappa) % kappa;
    if (i < 0) i += kappa;
    m = m * kappa + static_cast<int>(i);
  }
  return m;
}

TransportPlan wasserstein2_plan(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("wasserstein2: dimension mismatch");
  Eigen::MatrixXd cost(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) {
      const double r = torus_distance(mu.atoms()[i], nu.atoms()[j]);
      cost(i, j) = r * r;
    }
  const Eigen::Map<const Eigen::VectorXd> a(mu.masses().data(), mu.size());
  const Eigen::Map<const Eigen::VectorXd> b(nu.masses().data(), nu.size());
  TransportPlan plan = solve_transportation(a, b, cost);
  if (!plan.audit_ok)
    throw std::runtime_error("wasserstein2: optimality audit failed (min reduced cost " +
                             std::to_string(plan.min_reduced_cost) + ", marginal error " +
                             std::to_string(plan.marginal_error) + ")");
  return plan;
}

double wasserstein2(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  return std::sqrt(std::max(0.0, wasserstein2_plan(mu, nu).cost));
}

BottleneckMatching bottleneck_dinf(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  if (mu.size() != nu.size()) throw std::invalid_argument("bottleneck_dinf: cardinality mismatch");
  if (mu.dim() != nu.dim()) throw std::invalid_argument("bottleneck_dinf: dimension mismatch");
  const double unit = 1.0 / mu.size();
  for (int i = 0; i < mu.size(); ++i)
    if (std::abs(mu.masses()[i] - unit) > 1e-12 || std::abs(nu.masses()[i] - unit) > 1e-12)
      throw std::invalid_argument("bottleneck_dinf: measures must be uniform");
  const auto match = bottleneck_assignment(mu.atoms(), nu.atoms(), 1);
  return {match.owner, match.delta};
}

int default_refinement_kappa(int n, int dim, int factor) {
  if (n < 1 || dim < 1) throw std::invalid_argument("default_refinement_kappa: n and d must be positive");
  for (long kappa = 1;; ++kappa) {
    long m = 1;
    for (int k = 0; k < dim; ++k) m *= kappa;
    if (m >= static_cast<long>(factor) * n && m % n == 0) return static_cast<int>(kappa);
    if (m > 100000000L) throw std::invalid_argument("default_refinement_kappa: grid too large");
  }
}

DeltaEstimate estimate_delta_n(const PointCloud& cloud, int kappa) {
  const int n = cloud.size();
  if (n == 0) throw std::invalid_argument("estimate_delta_n: empty cloud");
  if (kappa <= 0) kappa = default_refinement_kappa(n, cloud.dim());
  const PointCloud grid = regular_grid(kappa, cloud.dim());
  if (grid.size() % n != 0)
    throw std::invalid_argument("estimate_delta_n: grid size " + std::to_string(grid.size()) +
                                " is not a multiple of n = " + std::to_string(n));
  const auto match = bottleneck_assignment(grid.points(), cloud.points(), grid.size() / n);
  DeltaEstimate out;
  out.delta = match.delta;
  out.spacing = 1.0 / kappa;
  out.partition.kappa = kappa;
  out.partition.dim = cloud.dim();
  out.partition.nodes = n;
  out.partition.owner = match.owner;
  out.partition.cell_radius = match.delta;
  return out;
}

GridDensity pn_project(const DiscreteDensity& rho, const PartitionMap& part) {
  if (rho.size() != part.nodes) throw std::invalid_argument("pn_project: density size differs from partition");
  Eigen::VectorXd v(part.owner.size());
  for (size_t m = 0; m < part.owner.size(); ++m) v[m] = rho[part.owner[m]];
  return GridDensity(part.kappa, part.dim, std::move(v), 1e-9);
}

DiscreteDensity qn_project(const GridDensity& rho, const PartitionMap& part) {
  if (rho.kappa() != part.kappa || rho.dim() != part.dim)
    throw std::invalid_argument("qn_project: grid differs from partition grid");
  // n * mu(U_i) is the mean over the M/n grid points of U_i; summing offsets
  // from the first value keeps constant cells exact
  const int n = part.nodes;
  const double k = part.per_cell();
  std::vector<double> first(n, 0.0), offset(n, 0.0);
  std::vector<char> seen(n, 0);
  for (size_t m = 0; m < part.owner.size(); ++m) {
    const int i = part.owner[m];
    const double v = rho.values()[m];
    if (!seen[i]) {
      seen[i] = 1;
      first[i] = v;
    } else {
      offset[i] += v - first[i];
    }
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = first[i] + offset[i] / k;
  return DiscreteDensity(std::move(out), 1e-9);
}

DiscreteDensity qn_project(const AtomicMeasure& mu, const PartitionMap& part) {
  if (mu.dim() != part.dim) throw std::invalid_argument("qn_project: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(part.nodes);
  for (int a = 0; a < mu.size(); ++a)
    out[part.owner[nearest_grid_index(mu.atoms()[a], part.kappa)]] += part.nodes * mu.masses()[a];
  return DiscreteDensity(std::move(out), 1e-9);
}

int heat_truncation(double s, double tail) {
  if (!(s > 0.0)) throw std::invalid_argument("heat_truncation: s must be positive");
  // after nearest-image reduction |u| <= 1/2, so images with |k| = j > K sit
  // at distance >= j - 1/2; the dropped 1-D mass is below
  // 2 sum_{j > K} (4 pi s)^{-1/2} exp(-(j - 1/2)^2 / 4s)
  const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * s);
  for (int K = 0;; ++K) {
    double dropped = 0.0;
    for (int j = K + 1; j < K + 200; ++j) {
      const double term = 2.0 * norm * std::exp(-(j - 0.5) * (j - 0.5) / (4.0 * s));
      dropped += term;
      if (term < 1e-300) break;
    }
    if (dropped < tail) return K;
  }
}

GridDensity heat_smooth(const AtomicMeasure& mu, double s, int kappa, int truncation) {
  if (!(s > 0.0)) throw std::invalid_argument("heat_smooth: s must be positive");
  if (kappa < 1) throw std::invalid_argument("heat_smooth: kappa must be positive");
  const int d = mu.dim();
  const int K = truncation >= 0 ? truncation : heat_truncation(s);
  const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * s);
  long total = 1;
  for (int k = 0; k < d; ++k) total *= kappa;

  // the kernel factorizes over axes: one wrapped 1-D profile per atom and axis
  auto profile = [&](double center) {
    Eigen::VectorXd g(kappa);
    for (int i = 0; i < kappa; ++i) {
      double u = static_cast<double>(i) / kappa - center;
      u -= std::round(u);
      double acc = 0.0;
      for (int k = -K; k <= K; ++k) acc += std::exp(-(u + k) * (u + k) / (4.0 * s));
      g[i] = norm * acc;
    }
    return g;
  };
  Eigen::VectorXd values = Eigen::VectorXd::Zero(total);
  std::vector<Eigen::VectorXd> prof(d);
  for (int a = 0; a < mu.size(); ++a) {
    for (int k = 0; k < d; ++k) prof[k] = profile(mu.atoms()[a][k]);
    const double w = mu.masses()[a];
    for (long m = 0; m < total; ++m) {
      long rest = m;
      double v = w;
      for (int k = d - 1; k >= 0; --k) {
        v *= prof[k][rest % kappa];
        rest /= kappa;
      }
      values[m] += v;
    }
  }
  values /= values.mean();
  return GridDensity(kappa, d, std::move(values));
}

DiscreteDensity f_map(const AtomicMeasure& mu, double s, const PartitionMap& part) {
  return qn_project(heat_smooth(mu, s, part.kappa), part);
}

}  // namespace graphot
