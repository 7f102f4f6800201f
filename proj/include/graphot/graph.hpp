#pragma once

// epsilon-neighborhood graphs over point clouds and their discrete calculus:
// gradient, divergence, Laplacian, Dirichlet energy and the spectral gap.
//
// Conventions. With gamma the uniform measure (1/n per node) and weights w:
//   grad u (i,j)  = (u_j - u_i) / eps
//   div V (i)     = (1/eps) sum_j (V(i,j) - V(j,i)) w_ij / n
//   Lap           = -div o grad
//   <u,v>         = (1/n)   sum_i u_i v_i
//   <U,V>_X       = (1/n^2) sum_{i,j} U(i,j) V(i,j) w_ij

#include "graphot/torus.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace graphot {

using NodeFunction = Eigen::VectorXd;

enum class Kernel { Indicator };

/// Undirected edge i < j with its kernel weight.
struct Edge {
  int i;
  int j;
  double weight;
};

class GeometricGraph {
 public:
  /// Abstract weighted graph (X, w, uniform gamma, eps). Weights are given per
  /// unordered pair; pairs with zero weight are dropped, diagonal entries are
  /// kept as self weights and never enter the calculus.
  static GeometricGraph from_weights(int n, double eps, const std::vector<Edge>& edges,
                                     std::vector<double> self_weights = {});

  /// Complete graph K_N with eps = 1 and w = 1 on every pair, so that the
  /// transition matrix w(x,y) gamma(y) has 1/N in all its entries.
  static GeometricGraph complete(int n);

  int size() const { return n_; }
  double eps() const { return eps_; }
  Kernel kernel() const { return kernel_; }
  const std::optional<PointCloud>& cloud() const { return cloud_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  /// w(i,j) for any ordered pair, zero outside the edge set.
  double weight(int i, int j) const;
  double self_weight(int i) const { return self_weights_.empty() ? 0.0 : self_weights_[i]; }
  /// Index into edges() of the pair {i,j}, or -1.
  int edge_index(int i, int j) const;

  struct Incidence {
    int neighbor;
    int edge;
    int sign;  // +1 if this node is the edge's first endpoint
  };
  const std::vector<Incidence>& incident(int i) const { return adjacency_[i]; }

  /// Connected components as lists of node indices, ordered by smallest member.
  std::vector<std::vector<int>> components() const;
  bool connected() const;
  /// Throws DisconnectedGraphError naming a component that misses node 0.
  void require_connected(const std::string& context) const;

  /// Sparse symmetric matrix of the graph Laplacian Delta_n acting on node values.
  Eigen::SparseMatrix<double> laplacian_matrix() const;

 private:
  friend GeometricGraph build_graph(const PointCloud& cloud, double eps, Kernel kernel);
  GeometricGraph(int n, double eps, std::vector<Edge> edges, std::vector<double> self_weights);

  int n_ = 0;
  double eps_ = 1.0;
  Kernel kernel_ = Kernel::Indicator;
  std::optional<PointCloud> cloud_;
  std::vector<Edge> edges_;
  std::vector<double> self_weights_;
  std::vector<std::vector<Incidence>> adjacency_;
};

class DisconnectedGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// eta(r) = 1 if r <= 1, else 0.
double indicator_kernel(double r);

/// w(i,j) = eps^{-d} eta(|x_i - x_j| / eps) over all pairs within torus distance eps.
/// Uses a cell list with bucket side >= eps.
GeometricGraph build_graph(const PointCloud& cloud, double eps, Kernel kernel = Kernel::Indicator);

/// Discrete vector field over the ordered pairs of a graph's edge set.
/// forward[e] holds V(i,j) and backward[e] holds V(j,i) for edges()[e] = {i,j}.
class EdgeField {
 public:
  EdgeField() = default;
  explicit EdgeField(int edge_count, bool antisymmetric = false);

  /// Antisymmetric field from per-edge values v_e = V(i,j) = -V(j,i).
  static EdgeField antisymmetric(Eigen::VectorXd values);

  /// Build from ordered-pair values; throws std::invalid_argument for any pair
  /// outside the graph's support. Diagonal pairs are inert and dropped.
  static EdgeField from_pairs(const GeometricGraph& g, const std::map<std::pair<int, int>, double>& values);

  int edge_count() const { return static_cast<int>(forward.size()); }
  bool is_antisymmetric() const { return antisymmetric_; }

  double at(const GeometricGraph& g, int i, int j) const;

  /// Antisymmetric part (V(i,j) - V(j,i)) / 2.
  EdgeField antisymmetric_part() const;

  Eigen::VectorXd forward;
  Eigen::VectorXd backward;

 private:
  bool antisymmetric_ = false;
};

/// <u, v> in L^2(nu_n).
double inner_nodes(const NodeFunction& u, const NodeFunction& v);
/// <U, V> on discrete vector fields.
double inner_edges(const GeometricGraph& g, const EdgeField& u, const EdgeField& v);

EdgeField gradient(const GeometricGraph& g, const NodeFunction& u);
NodeFunction divergence(const GeometricGraph& g, const EdgeField& v);
NodeFunction laplacian_apply(const GeometricGraph& g, const NodeFunction& u);
double dirichlet_energy(const GeometricGraph& g, const NodeFunction& u);

struct EigenPair {
  double value;
  NodeFunction vector;  // mean zero, unit norm in L^2(nu_n)
  double residual;      // ||Lap f - lambda f|| in L^2(nu_n)
  int iterations;
};

/// First non-trivial eigenvalue of Delta_n by Lanczos iteration on the
/// mean-zero subspace (full reorthogonalization). Throws on disconnected graphs.
EigenPair smallest_nontrivial_eigenvalue(const GeometricGraph& g, double tol = 1e-8,
                                         std::uint64_t seed = 0);

}  // namespace graphot
