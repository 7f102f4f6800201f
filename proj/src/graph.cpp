#include "graphot/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace graphot {

double indicator_kernel(double r) { return r <= 1.0 ? 1.0 : 0.0; }

GeometricGraph::GeometricGraph(int n, double eps, std::vector<Edge> edges,
                               std::vector<double> self_weights)
    : n_(n), eps_(eps), edges_(std::move(edges)), self_weights_(std::move(self_weights)) {
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  adjacency_.assign(n_, {});
  for (int e = 0; e < edge_count(); ++e) {
    adjacency_[edges_[e].i].push_back({edges_[e].j, e, +1});
    adjacency_[edges_[e].j].push_back({edges_[e].i, e, -1});
  }
  for (auto& list : adjacency_)
    std::sort(list.begin(), list.end(),
              [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
}

GeometricGraph GeometricGraph::from_weights(int n, double eps, const std::vector<Edge>& edges,
                                            std::vector<double> self_weights) {
  if (n < 0) throw std::invalid_argument("from_weights: negative node count");
  if (!(eps > 0.0)) throw std::invalid_argument("from_weights: eps must be positive");
  if (!self_weights.empty() && static_cast<int>(self_weights.size()) != n)
    throw std::invalid_argument("from_weights: self weight count differs from node count");
  std::map<std::pair<int, int>, double> merged;
  for (const auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
      throw std::invalid_argument("from_weights: edge endpoint out of range");
    if (e.weight < 0.0 || !std::isfinite(e.weight))
      throw std::invalid_argument("from_weights: weights must be finite and non-negative");
    if (e.i == e.j) {
      if (self_weights.empty()) self_weights.assign(n, 0.0);
      self_weights[e.i] = e.weight;
      continue;
    }
    auto key = std::minmax(e.i, e.j);
    auto [it, inserted] = merged.emplace(std::pair{key.first, key.second}, e.weight);
    if (!inserted && it->second != e.weight)
      throw std::invalid_argument("from_weights: asymmetric weights for pair (" +
                                  std::to_string(e.i) + "," + std::to_string(e.j) + ")");
  }
  std::vector<Edge> out;
  out.reserve(merged.size());
  for (const auto& [key, w] : merged)
    if (w > 0.0) out.push_back({key.first, key.second, w});
  return GeometricGraph(n, eps, std::move(out), std::move(self_weights));
}

GeometricGraph GeometricGraph::complete(int n) {
  if (n < 1) throw std::invalid_argument("complete: need at least one node");
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  // gamma(y) w(x,y) = 1/N is the uniform transition matrix
  const double w = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, w});
  return GeometricGraph(n, 1.0, std::move(edges), std::vector<double>(n, w));
}

double GeometricGraph::weight(int i, int j) const {
  if (i == j) return self_weight(i);
  int e = edge_index(i, j);
  return e < 0 ? 0.0 : edges_[e].weight;
}

int GeometricGraph::edge_index(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) return -1;
  const auto& list = adjacency_[i];
  auto it = std::lower_bound(list.begin(), list.end(), j,
                             [](const Incidence& a, int v) { return a.neighbor < v; });
  return (it != list.end() && it->neighbor == j) ? it->edge : -1;
}

std::vector<std::vector<int>> GeometricGraph::components() const {
  std::vector<int> label(n_, -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n_; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> comp{s};
    label[s] = static_cast<int>(out.size());
    for (size_t h = 0; h < comp.size(); ++h)
      for (const auto& inc : adjacency_[comp[h]])
        if (label[inc.neighbor] < 0) {
          label[inc.neighbor] = label[s];
          comp.push_back(inc.neighbor);
        }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool GeometricGraph::connected() const { return n_ <= 1 || components().size() == 1; }

void GeometricGraph::require_connected(const std::string& context) const {
  if (connected()) return;
  auto comps = components();
  const auto& c = comps[1];
  throw DisconnectedGraphError(context + ": graph is disconnected (" + std::to_string(comps.size()) +
                               " components); component containing node " + std::to_string(c.front()) +
                               " has " + std::to_string(c.size()) + " node(s)");
}

Eigen::SparseMatrix<double> GeometricGraph::laplacian_matrix() const {
  // Lap u (i) = (2 / (n eps^2)) sum_j w_ij (u_i - u_j)
  const double scale = 2.0 / (n_ * eps_ * eps_);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * edges_.size());
  for (const auto& e : edges_) {
    const double c = scale * e.weight;
    trip.emplace_back(e.i, e.i, c);
    trip.emplace_back(e.j, e.j, c);
    trip.emplace_back(e.i, e.j, -c);
    trip.emplace_back(e.j, e.i, -c);
  }
  Eigen::SparseMatrix<double> m(n_, n_);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

GeometricGraph build_graph(const PointCloud& cloud, double eps, Kernel kernel) {
  if (!(eps > 0.0)) throw std::invalid_argument("build_graph: eps must be positive");
  const int n = cloud.size();
  const int d = cloud.dim();
  const double w = std::pow(eps, -d);
  std::vector<Edge> edges;

  auto consider = [&](int i, int j) {
    const double r = torus_distance(cloud[i], cloud[j]);
    const double eta = indicator_kernel(r / eps);
    if (eta > 0.0) edges.push_back({std::min(i, j), std::max(i, j), w * eta});
  };

  // bucket side 1/m >= eps; with fewer than 3 buckets per axis the neighbor
  // stencil wraps onto itself, so scan all pairs instead
  const int m = static_cast<int>(std::floor(1.0 / eps));
  long buckets = 1;
  for (int k = 0; k < d && m >= 3; ++k) buckets *= m;
  if (m < 3 || buckets > 8L * std::max(n, 1)) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) consider(i, j);
  } else {
    auto cell_of = [&](const TorusPoint& p) {
      long c = 0;
      for (int k = 0; k < d; ++k) c = c * m + std::min(m - 1, static_cast<int>(p[k] * m));
      return c;
    };
    std::vector<std::vector<int>> bucket(buckets);
    for (int i = 0; i < n; ++i) bucket[cell_of(cloud[i])].push_back(i);
    long stencil = 1;
    for (int k = 0; k < d; ++k) stencil *= 3;
    std::vector<int> coord(d), other(d);
    for (long b = 0; b < buckets; ++b) {
      long rem = b;
      for (int k = d - 1; k >= 0; --k) {
        coord[k] = static_cast<int>(rem % m);
        rem /= m;
      }
      for (long s = 0; s < stencil; ++s) {
        long sr = s;
        long nb = 0;
        for (int k = 0; k < d; ++k) {
          const int off = static_cast<int>(sr % 3) - 1;
          sr /= 3;
          other[k] = (coord[k] + off + m) % m;
        }
        for (int k = 0; k < d; ++k) nb = nb * m + other[k];
        if (nb < b) continue;
        for (int i : bucket[b])
          for (int j : bucket[nb])
            if (nb != b || i < j) consider(i, j);
      }
    }
  }
  GeometricGraph g(n, eps, std::move(edges), std::vector<double>(n, w * indicator_kernel(0.0)));
  g.kernel_ = kernel;
  g.cloud_ = cloud;
  return g;
}

EdgeField::EdgeField(int edge_count, bool antisymmetric)
    : forward(Eigen::VectorXd::Zero(edge_count)),
      backward(Eigen::VectorXd::Zero(edge_count)),
      antisymmetric_(antisymmetric) {}

EdgeField EdgeField::antisymmetric(Eigen::VectorXd values) {
  EdgeField f;
  f.backward = -values;
  f.forward = std::move(values);
  f.antisymmetric_ = true;
  return f;
}

EdgeField EdgeField::from_pairs(const GeometricGraph& g,
                                const std::map<std::pair<int, int>, double>& values) {
  EdgeField f(g.edge_count());
  for (const auto& [key, v] : values) {
    const auto [i, j] = key;
    if (i == j && i >= 0 && i < g.size()) continue;
    const int e = g.edge_index(i, j);
    if (e < 0)
      throw std::invalid_argument("EdgeField: pair (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") is outside the graph's edge set");
    (g.edges()[e].i == i ? f.forward : f.backward)[e] = v;
  }
  return f;
}

double EdgeField::at(const GeometricGraph& g, int i, int j) const {
  const int e = g.edge_index(i, j);
  if (e < 0) return 0.0;
  return g.edges()[e].i == i ? forward[e] : backward[e];
}

EdgeField EdgeField::antisymmetric_part() const {
  return antisymmetric(0.5 * (forward - backward));
}

namespace {

void check_field(const GeometricGraph& g, const EdgeField& v) {
  if (v.edge_count() != g.edge_count())
    throw std::invalid_argument("edge field is not supported on this graph's edge set");
}

void check_nodes(const GeometricGraph& g, const NodeFunction& u) {
  if (u.size() != g.size())
    throw std::invalid_argument("node function has " + std::to_string(u.size()) +
                                " values, graph has " + std::to_string(g.size()) + " nodes");
}

}  // namespace

double inner_nodes(const NodeFunction& u, const NodeFunction& v) {
  if (u.size() != v.size()) throw std::invalid_argument("inner_nodes: size mismatch");
  if (u.size() == 0) return 0.0;
  return u.dot(v) / static_cast<double>(u.size());
}

double inner_edges(const GeometricGraph& g, const EdgeField& u, const EdgeField& v) {
  check_field(g, u);
  check_field(g, v);
  double acc = 0.0;
  for (int e = 0; e < g.edge_count(); ++e)
    acc += (u.forward[e] * v.forward[e] + u.backward[e] * v.backward[e]) * g.edges()[e].weight;
  const double n = g.size();
  return acc / (n * n);
}

EdgeField gradient(const GeometricGraph& g, const NodeFunction& u) {
  check_nodes(g, u);
  Eigen::VectorXd vals(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edges()[e];
    vals[e] = (u[ed.j] - u[ed.i]) / g.eps();
  }
  return EdgeField::antisymmetric(std::move(vals));
}

NodeFunction divergence(const GeometricGraph& g, const EdgeField& v) {
  check_field(g, v);
  NodeFunction out = NodeFunction::Zero(g.size());
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edges()[e];
    const double flux = (v.forward[e] - v.backward[e]) * ed.weight;
    out[ed.i] += flux;
    out[ed.j] -= flux;
  }
  if (g.size() > 0) out /= (g.eps() * g.size());
  return out;
}

NodeFunction laplacian_apply(const GeometricGraph& g, const NodeFunction& u) {
  return -divergence(g, gradient(g, u));
}

double dirichlet_energy(const GeometricGraph& g, const NodeFunction& u) {
  const EdgeField grad = gradient(g, u);
  return inner_edges(g, grad, grad);
}

EigenPair smallest_nontrivial_eigenvalue(const GeometricGraph& g, double tol, std::uint64_t seed) {
  const int n = g.size();
  if (n < 2) throw std::invalid_argument("smallest_nontrivial_eigenvalue: need at least two nodes");
  g.require_connected("smallest_nontrivial_eigenvalue");
  const Eigen::SparseMatrix<double> lap = g.laplacian_matrix();

  auto project_mean_zero = [](Eigen::VectorXd& v) { v.array() -= v.mean(); };

  Rng rng(seed, 0x4c414e43ULL);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = rng.uniform() - 0.5;
  project_mean_zero(q);
  q.normalize();

  const int max_dim = n - 1;
  Eigen::MatrixXd basis(n, std::min(max_dim, 64));
  std::vector<double> alpha, beta;
  double best_value = 0.0;
  Eigen::VectorXd best_vec;
  double best_res = std::numeric_limits<double>::infinity();

  for (int m = 0; m < max_dim; ++m) {
    if (m >= basis.cols()) basis.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(max_dim, 2 * basis.cols()));
    basis.col(m) = q;
    Eigen::VectorXd w = lap * q;
    const double a = q.dot(w);
    alpha.push_back(a);
    w -= a * q;
    if (m > 0) w -= beta.back() * basis.col(m - 1);
    // full reorthogonalization, twice, plus the constant direction
    for (int pass = 0; pass < 2; ++pass) {
      project_mean_zero(w);
      w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
    }
    const double b = w.norm();

    const bool last = (m + 1 == max_dim) || b < 1e-14 * std::max(1.0, std::abs(a));
    if ((m + 1) % 4 == 0 || last) {
      const int k = m + 1;
      Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) {
        tri(i, i) = alpha[i];
        if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
      const double theta = es.eigenvalues()[0];
      Eigen::VectorXd f = basis.leftCols(k) * es.eigenvectors().col(0);
      Eigen::VectorXd r = lap * f - theta * f;
      // norms in L^2(nu_n): divide Euclidean norms by sqrt(n)
      const double scale = std::sqrt(static_cast<double>(n)) / f.norm();
      f *= scale;
      r *= scale;
      const double res = r.norm() / std::sqrt(static_cast<double>(n));
      best_value = theta;
      best_vec = f;
      best_res = res;
      if (res <= tol * std::abs(theta) || last) {
        // sign convention: first clearly nonzero entry positive
        for (Eigen::Index i = 0; i < f.size(); ++i)
          if (std::abs(f[i]) > 1e-8) {
            if (f[i] < 0) best_vec = -f;
            break;
          }
        return {best_value, best_vec, best_res, k};
      }
    }
    beta.push_back(b);
    q = w / b;
  }
  return {best_value, best_vec, best_res, max_dim};
}

}  // namespace graphot
