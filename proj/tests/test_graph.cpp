#include "graphot/graph.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace graphot;
using testsupport::connected_graph;
using testsupport::random_field;
using testsupport::random_values;

namespace {

// dense matrix of Delta_n straight from the pair weights
Eigen::MatrixXd dense_laplacian(const GeometricGraph& g) {
  const int n = g.size();
  const double c = 2.0 / (n * g.eps() * g.eps());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        L(i, j) -= c * g.weight(i, j);
        L(i, i) += c * g.weight(i, j);
      }
  return L;
}

double dense_lambda(const GeometricGraph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_laplacian(g));
  return es.eigenvalues()[1];
}

}  // namespace

TEST_CASE("build_graph weights") {
  PointCloud two(1, {TorusPoint{0.1}, TorusPoint{0.4}});
  auto g = build_graph(two, 0.5);
  REQUIRE(g.edge_count() == 1);
  CHECK(g.weight(0, 1) == doctest::Approx(2.0));
  CHECK(g.weight(1, 0) == doctest::Approx(2.0));

  PointCloud far(2, {TorusPoint{0.1, 0.1}, TorusPoint{0.5, 0.5}});
  CHECK(build_graph(far, 0.5).edge_count() == 0);
  // the wrapped distance is 0.4
  PointCloud wrap(1, {TorusPoint{0.05}, TorusPoint{0.65}});
  CHECK(build_graph(wrap, 0.5).edge_count() == 1);

  CHECK_THROWS_AS(build_graph(two, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(two, -1.0), std::invalid_argument);
}

TEST_CASE("cell list finds exactly the brute-force edges") {
  for (int d = 1; d <= 3; ++d)
    for (double eps : {0.05, 0.2, 0.45}) {
      const auto cloud = sample_uniform(120, d, 11 * d);
      const auto g = build_graph(cloud, eps);
      std::set<std::pair<int, int>> expect;
      for (int i = 0; i < cloud.size(); ++i)
        for (int j = i + 1; j < cloud.size(); ++j)
          if (torus_distance(cloud[i], cloud[j]) <= eps) expect.insert({i, j});
      std::set<std::pair<int, int>> got;
      for (const auto& e : g.edges()) {
        got.insert({e.i, e.j});
        CHECK(e.weight == doctest::Approx(std::pow(eps, -d)));
      }
      CHECK(got == expect);
    }
}

TEST_CASE("gradient and divergence on small cases") {
  auto g = GeometricGraph::from_weights(2, 1.0, {{0, 1, 1.0}});
  Eigen::VectorXd u(2);
  u << 0.0, 1.0;
  const auto du = gradient(g, u);
  CHECK(du.at(g, 0, 1) == doctest::Approx(1.0));
  CHECK(du.at(g, 1, 0) == doctest::Approx(-1.0));

  const auto cg = connected_graph(40, 2, 0.3, 1);
  CHECK(gradient(cg, Eigen::VectorXd::Constant(40, 3.0)).forward.cwiseAbs().maxCoeff() == 0.0);

  Rng rng(5);
  EdgeField sym(cg.edge_count());
  sym.forward = random_values(cg.edge_count(), rng);
  sym.backward = sym.forward;
  CHECK(divergence(cg, sym).cwiseAbs().maxCoeff() == 0.0);

  EdgeField cst(cg.edge_count());
  cst.forward.setConstant(2.5);
  cst.backward.setConstant(2.5);
  CHECK(divergence(cg, cst).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(gradient(cg, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(divergence(cg, EdgeField(3)), std::invalid_argument);
}

TEST_CASE("divergence matches the pair-sum formula") {
  const auto g = connected_graph(30, 1, 0.2, 2);
  Rng rng(9);
  const auto v = random_field(g, rng);
  const auto div = divergence(g, v);
  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i && g.weight(i, j) > 0) s += (v.at(g, i, j) - v.at(g, j, i)) * g.weight(i, j);
    CHECK(div[i] == doctest::Approx(s / (g.eps() * n)).epsilon(1e-12));
  }
}

TEST_CASE("divergence is minus the adjoint of the gradient") {
  const auto g = connected_graph(50, 1, 0.2, 3);
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto u = random_values(g.size(), rng);
    const auto v = random_field(g, rng);
    const auto du = gradient(g, u);
    const double lhs = inner_nodes(divergence(g, v), u);
    const double rhs = -inner_edges(g, v, du);
    const double scale = std::sqrt(inner_edges(g, v, v) * inner_edges(g, du, du));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
  }
}

TEST_CASE("from_pairs rejects pairs outside the support") {
  auto g = GeometricGraph::from_weights(3, 1.0, {{0, 1, 1.0}, {1, 2, 1.0}});
  auto v = EdgeField::from_pairs(g, {{{0, 1}, 2.0}, {{1, 0}, -1.0}, {{2, 2}, 9.0}});
  CHECK(v.at(g, 0, 1) == 2.0);
  CHECK(v.at(g, 1, 0) == -1.0);
  CHECK_THROWS_AS(EdgeField::from_pairs(g, {{{0, 2}, 1.0}}), std::invalid_argument);
  const auto a = v.antisymmetric_part();
  CHECK(a.at(g, 0, 1) == doctest::Approx(1.5));
  CHECK(a.at(g, 1, 0) == doctest::Approx(-1.5));
  // the antisymmetric part carries the whole divergence
  CHECK((divergence(g, a) - divergence(g, v)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("laplacian, energy and integration by parts") {
  const auto g = connected_graph(60, 2, 0.25, 4);
  Rng rng(2);
  CHECK(laplacian_apply(g, Eigen::VectorXd::Ones(60)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dirichlet_energy(g, Eigen::VectorXd::Ones(60)) == doctest::Approx(0.0));
  const auto L = dense_laplacian(g);
  for (int t = 0; t < 5; ++t) {
    const auto u = random_values(60, rng);
    const double e = dirichlet_energy(g, u);
    CHECK(e >= 0.0);
    CHECK(inner_nodes(laplacian_apply(g, u), u) == doctest::Approx(e).epsilon(1e-10));
    CHECK(dirichlet_energy(g, 3.0 * u) == doctest::Approx(9.0 * e).epsilon(1e-12));
    CHECK((laplacian_apply(g, u) - L * u).cwiseAbs().maxCoeff() <= 1e-10 * (L * u).cwiseAbs().maxCoeff());
    const Eigen::SparseMatrix<double> S = g.laplacian_matrix();
    CHECK((S * u - L * u).cwiseAbs().maxCoeff() <= 1e-10 * (L * u).cwiseAbs().maxCoeff());
  }
}

TEST_CASE("spectral gap against a dense eigensolver") {
  // every pair within eps: all weights equal
  PointCloud close(1, {TorusPoint{0.0}, TorusPoint{0.05}, TorusPoint{0.1}, TorusPoint{0.12}, TorusPoint{0.2}});
  const auto kc = build_graph(close, 0.5);
  CHECK(kc.edge_count() == 10);
  CHECK(smallest_nontrivial_eigenvalue(kc).value == doctest::Approx(dense_lambda(kc)).epsilon(1e-8));

  const auto k7 = GeometricGraph::complete(7);
  CHECK(smallest_nontrivial_eigenvalue(k7).value == doctest::Approx(2.0).epsilon(1e-9));

  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto g = connected_graph(80, 2, 0.25, 20 + s);
    const auto ep = smallest_nontrivial_eigenvalue(g, 1e-10);
    CHECK(ep.value == doctest::Approx(dense_lambda(g)).epsilon(1e-7));
    CHECK(ep.vector.mean() == doctest::Approx(0.0).scale(1.0));
    CHECK(inner_nodes(ep.vector, ep.vector) == doctest::Approx(1.0));
    CHECK(ep.residual < 1e-6);
  }
}

TEST_CASE("eigenvalue is invariant under relabeling") {
  const auto cloud = sample_uniform(60, 2, 31);
  std::vector<int> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 17, perm.end());
  std::vector<TorusPoint> pts;
  for (int i : perm) pts.push_back(cloud[i]);
  const auto g1 = build_graph(cloud, 0.3);
  const auto g2 = build_graph(PointCloud(2, pts), 0.3);
  REQUIRE(g1.connected());
  CHECK(smallest_nontrivial_eigenvalue(g1, 1e-10).value ==
        doctest::Approx(smallest_nontrivial_eigenvalue(g2, 1e-10).value).epsilon(1e-8));
}

TEST_CASE("Poincare inequality") {
  const auto g = connected_graph(70, 2, 0.25, 8);
  const double lambda = smallest_nontrivial_eigenvalue(g, 1e-10).value;
  CHECK(lambda > 0.0);
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd u = random_values(70, rng);
    u.array() -= u.mean();
    CHECK(inner_nodes(u, u) <= dirichlet_energy(g, u) / lambda + 1e-10);
  }
}

TEST_CASE("disconnected graphs") {
  PointCloud two_blobs(1, {TorusPoint{0.0}, TorusPoint{0.01}, TorusPoint{0.5}, TorusPoint{0.51}});
  const auto g = build_graph(two_blobs, 0.05);
  CHECK_FALSE(g.connected());
  CHECK(g.components().size() == 2);
  CHECK(g.components()[1] == std::vector<int>{2, 3});
  CHECK_THROWS_AS(smallest_nontrivial_eigenvalue(g), DisconnectedGraphError);
  try {
    g.require_connected("test");
  } catch (const DisconnectedGraphError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
}
