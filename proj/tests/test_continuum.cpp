#include "graphot/continuum_ot.hpp"
#include "graphot/matching.hpp"
#include "graphot/transport_simplex.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace graphot;

namespace {

// successive shortest paths with Bellman-Ford on the residual graph
double min_cost_flow_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& c) {
  const int m = static_cast<int>(a.size()), k = static_cast<int>(b.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, k);
  Eigen::VectorXd sa = a, db = b;
  const double inf = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 10 * (m + k) * (m + k); ++round) {
    if (sa.maxCoeff() <= 1e-15) break;
    // nodes 0..m-1 rows, m..m+k-1 columns
    std::vector<double> dist(m + k, inf);
    std::vector<int> prev(m + k, -1);
    for (int i = 0; i < m; ++i)
      if (sa[i] > 1e-15) dist[i] = 0.0;
    for (int it = 0; it < m + k; ++it) {
      bool changed = false;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
          if (dist[i] + c(i, j) < dist[m + j] - 1e-15) {
            dist[m + j] = dist[i] + c(i, j);
            prev[m + j] = i;
            changed = true;
          }
          if (x(i, j) > 1e-15 && dist[m + j] - c(i, j) < dist[i] - 1e-15) {
            dist[i] = dist[m + j] - c(i, j);
            prev[i] = m + j;
            changed = true;
          }
        }
      if (!changed) break;
    }
    int best = -1;
    for (int j = 0; j < k; ++j)
      if (db[j] > 1e-15 && (best < 0 || dist[m + j] < dist[m + best])) best = j;
    // bottleneck along the path
    double push = db[best];
    int v = m + best;
    while (prev[v] >= 0) {
      const int u = prev[v];
      if (v < m) push = std::min(push, x(v, u - m));
      v = u;
    }
    push = std::min(push, sa[v]);
    const int src = v;
    v = m + best;
    while (prev[v] >= 0) {
      const int u = prev[v];
      if (v >= m)
        x(u, v - m) += push;
      else
        x(v, u - m) -= push;
      v = u;
    }
    sa[src] -= push;
    db[best] -= push;
  }
  return (x.array() * c.array()).sum();
}

Eigen::MatrixXd squared_costs(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  Eigen::MatrixXd c(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) c(i, j) = std::pow(torus_distance(mu.atoms()[i], nu.atoms()[j]), 2);
  return c;
}

AtomicMeasure random_measure(int atoms, int d, Rng& rng) {
  std::vector<TorusPoint> pts;
  std::vector<double> m;
  for (int a = 0; a < atoms; ++a) {
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x[k] = rng.uniform();
    pts.emplace_back(x);
    m.push_back(0.1 + rng.uniform());
  }
  const double s = std::accumulate(m.begin(), m.end(), 0.0);
  for (auto& v : m) v /= s;
  return AtomicMeasure(pts, m);
}

// bottleneck of sorted cyclic matchings on the circle, minimized over the rotation
double cyclic_bottleneck_1d(std::vector<double> left, std::vector<double> right) {
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  const int m = static_cast<int>(left.size());
  double best = 1.0;
  for (int s = 0; s < m; ++s) {
    double worst = 0.0;
    for (int i = 0; i < m && worst < best; ++i) {
      const double d = std::abs(left[(i + s) % m] - right[i]);
      worst = std::max(worst, std::min(d, 1.0 - d));
    }
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

TEST_CASE("measures validate their masses") {
  CHECK_THROWS_AS(AtomicMeasure({TorusPoint{0.1}}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(AtomicMeasure({TorusPoint{0.1}, TorusPoint{0.2}}, {1.5, -0.5}), std::invalid_argument);
  CHECK(AtomicMeasure::uniform({TorusPoint{0.1}, TorusPoint{0.2}}).masses()[1] == 0.5);
  CHECK_THROWS_AS(GridDensity(2, 1, Eigen::Vector2d(1.0, 2.0)), std::invalid_argument);
}

TEST_CASE("W2 simple cases") {
  const TorusPoint x{0.1, 0.2}, y{0.8, 0.3};
  CHECK(wasserstein2(AtomicMeasure::dirac(x), AtomicMeasure::dirac(y)) ==
        doctest::Approx(torus_distance(x, y)).epsilon(1e-14));
  Rng rng(1);
  const auto mu = random_measure(6, 2, rng);
  CHECK(wasserstein2(mu, mu) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve_transportation(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.6), Eigen::Matrix2d::Zero()),
                  UnbalancedMassError);
}

TEST_CASE("W2 of uniform 3-point measures against all permutations") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    std::vector<TorusPoint> p, q;
    for (int a = 0; a < 3; ++a) {
      p.push_back(TorusPoint{rng.uniform()});
      q.push_back(TorusPoint{rng.uniform()});
    }
    std::vector<int> perm{0, 1, 2};
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int a = 0; a < 3; ++a) c += std::pow(torus_distance(p[a], q[perm[a]]), 2) / 3.0;
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(wasserstein2(AtomicMeasure::uniform(p), AtomicMeasure::uniform(q)) ==
          doctest::Approx(std::sqrt(best)).epsilon(1e-12));
  }
}

TEST_CASE("transport simplex against min-cost flow") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const auto mu = random_measure(2 + static_cast<int>(rng.below(7)), 2, rng);
    const auto nu = random_measure(2 + static_cast<int>(rng.below(7)), 2, rng);
    const auto plan = wasserstein2_plan(mu, nu);
    CHECK(plan.audit_ok);
    const Eigen::MatrixXd c = squared_costs(mu, nu);
    const double oracle = min_cost_flow_oracle(Eigen::Map<const Eigen::VectorXd>(mu.masses().data(), mu.size()),
                                               Eigen::Map<const Eigen::VectorXd>(nu.masses().data(), nu.size()), c);
    CHECK(plan.cost == doctest::Approx(oracle).epsilon(1e-10));
    double rows = 0.0;
    for (const auto& e : plan.entries) {
      CHECK(e.mass > 0.0);
      rows += e.mass;
    }
    CHECK(rows == doctest::Approx(1.0));
  }
}

TEST_CASE("transport simplex on degenerate grid problems") {
  // equal masses on both sides: every basis is degenerate
  const auto g12 = regular_grid(12, 2);
  const auto a = AtomicMeasure::uniform(g12.points());
  std::vector<TorusPoint> shifted;
  for (const auto& p : g12.points()) shifted.push_back(TorusPoint{p[0] + 0.03, p[1] - 0.02});
  const auto plan = wasserstein2_plan(a, AtomicMeasure::uniform(shifted));
  CHECK(plan.audit_ok);
  CHECK(std::sqrt(plan.cost) == doctest::Approx(std::hypot(0.03, 0.02)).epsilon(1e-10));
}

TEST_CASE("bottleneck matching") {
  const auto grid = regular_grid(5, 2);
  const auto id = bottleneck_dinf(AtomicMeasure::uniform(grid.points()), AtomicMeasure::uniform(grid.points()));
  CHECK(id.delta == 0.0);
  for (int i = 0; i < grid.size(); ++i) CHECK(id.assignment[i] == i);

  std::vector<TorusPoint> shifted;
  const double h = 0.04;
  for (const auto& p : grid.points()) shifted.push_back(TorusPoint{p[0] + h, p[1] + h});
  const auto sh = bottleneck_dinf(AtomicMeasure::uniform(grid.points()), AtomicMeasure::uniform(shifted));
  CHECK(sh.delta == doctest::Approx(h * std::sqrt(2.0)).epsilon(1e-12));

  const auto c1 = sample_uniform(30, 2, 4), c2 = sample_uniform(30, 2, 5);
  const auto ab = bottleneck_dinf(AtomicMeasure::uniform(c1.points()), AtomicMeasure::uniform(c2.points()));
  const auto ba = bottleneck_dinf(AtomicMeasure::uniform(c2.points()), AtomicMeasure::uniform(c1.points()));
  CHECK(ab.delta == ba.delta);
  double worst = 0.0;
  std::vector<int> seen(30, 0);
  for (int i = 0; i < 30; ++i) {
    worst = std::max(worst, torus_distance(c1[i], c2[ab.assignment[i]]));
    ++seen[ab.assignment[i]];
  }
  CHECK(worst == ab.delta);
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  CHECK_THROWS_AS(bottleneck_dinf(AtomicMeasure::uniform(c1.points()), AtomicMeasure::uniform(grid.points())),
                  std::invalid_argument);
}

TEST_CASE("delta_n in one dimension against cyclic matching") {
  const auto cloud = sample_uniform(64, 1, 17);
  CHECK(default_refinement_kappa(64, 1) == 1024);
  const auto est = estimate_delta_n(cloud);
  CHECK(est.spacing == 1.0 / 1024);

  std::vector<double> grid, reps;
  for (int m = 0; m < 1024; ++m) grid.push_back(m / 1024.0);
  for (const auto& p : cloud.points())
    for (int r = 0; r < 16; ++r) reps.push_back(p[0]);
  CHECK(est.delta == doctest::Approx(cyclic_bottleneck_1d(grid, reps)).epsilon(1e-12));

  // continuum value from a much finer grid
  std::vector<double> fine, fine_reps;
  for (int m = 0; m < 64 * 128; ++m) fine.push_back(m / (64.0 * 128.0));
  for (const auto& p : cloud.points())
    for (int r = 0; r < 128; ++r) fine_reps.push_back(p[0]);
  CHECK(std::abs(est.delta - cyclic_bottleneck_1d(fine, fine_reps)) <= 1.0 / 1024);

  // refinement through M = n, 4n, 16n never grows by more than one spacing
  const double d1 = estimate_delta_n(cloud, 64).delta;
  const double d4 = estimate_delta_n(cloud, 256).delta;
  CHECK(d4 <= d1 + 1.0 / 64);
  CHECK(est.delta <= d4 + 1.0 / 256);
}

TEST_CASE("delta_n of a grid cloud is zero") {
  const auto cloud = regular_grid(6, 2);
  const auto est = estimate_delta_n(cloud, 6);
  CHECK(est.delta == 0.0);
  CHECK(est.partition.per_cell() == 1);
}

TEST_CASE("partition cells are balanced") {
  const auto cloud = sample_uniform(50, 2, 3);
  const auto est = estimate_delta_n(cloud);
  const auto& part = est.partition;
  CHECK(part.kappa == 30);
  std::vector<int> count(50, 0);
  for (int o : part.owner) ++count[o];
  CHECK(std::all_of(count.begin(), count.end(), [&](int c) { return c == part.per_cell(); }));
  const auto grid = regular_grid(part.kappa, 2);
  for (int m = 0; m < grid.size(); ++m) CHECK(torus_distance(grid[m], cloud[part.owner[m]]) <= est.delta + 1e-15);
}

TEST_CASE("P and Q projections") {
  const auto cloud = sample_uniform(40, 2, 6);
  const auto part = estimate_delta_n(cloud).partition;
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto rho = testsupport::random_density(40, rng, 0.0);
    const auto back = qn_project(pn_project(rho, part), part);
    CHECK((back.values() - rho.values()).cwiseAbs().maxCoeff() == 0.0);
  }
  const auto one = pn_project(DiscreteDensity::uniform(40), part);
  CHECK(one.values().cwiseAbs().maxCoeff() == 1.0);
  CHECK(one.values().minCoeff() == 1.0);

  Eigen::VectorXd two(40);
  for (int i = 0; i < 40; ++i) two[i] = i % 2 ? 0.5 : 1.5;
  const auto p2 = pn_project(DiscreteDensity(two), part);
  CHECK(p2.values().mean() == doctest::Approx(1.0));
  CHECK((p2.values().array() == 0.5).count() == 20 * part.per_cell());
  CHECK((p2.values().array() == 1.5).count() == 20 * part.per_cell());

  const TorusPoint x{0.37, 0.81};
  const auto q = qn_project(AtomicMeasure::dirac(x), part);
  const int owner = part.owner[nearest_grid_index(x, part.kappa)];
  CHECK(q[owner] == 40.0);
  CHECK(q.values().sum() == 40.0);

  const auto grid = regular_grid(part.kappa, 2);
  const auto qu = qn_project(AtomicMeasure::uniform(grid.points()), part);
  CHECK((qu.values().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("heat smoothing") {
  CHECK_THROWS_AS(heat_smooth(AtomicMeasure::dirac(TorusPoint{0.5}), 0.0, 16), std::invalid_argument);
  CHECK(heat_truncation(0.01) >= 1);
  CHECK(heat_truncation(1.0) >= heat_truncation(0.01));

  // one Dirac in d = 1 against the wrapped Gaussian summed directly
  const double s = 0.01;
  const TorusPoint x{0.3};
  const auto h = heat_smooth(AtomicMeasure::dirac(x), s, 64);
  CHECK(h.values().mean() == doctest::Approx(1.0).epsilon(1e-14));
  for (int m = 0; m < 64; m += 5) {
    double v = 0.0;
    for (int k = -20; k <= 20; ++k) {
      const double u = m / 64.0 - 0.3 + k;
      v += std::exp(-u * u / (4 * s)) / std::sqrt(4 * M_PI * s);
    }
    CHECK(h.values()[m] == doctest::Approx(v).epsilon(1e-9));
  }

  Rng rng(11);
  for (int d = 1; d <= 2; ++d) {
    const auto mu = random_measure(5, d, rng);
    const auto hs = heat_smooth(mu, 0.01, d == 1 ? 128 : 32);
    CHECK(hs.values().mean() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hs.values().minCoeff() > 0.0);
    CHECK(wasserstein2(mu, hs.to_atomic()) <= std::sqrt(2 * d * 0.01) + 2 * hs.spacing());
  }
}

TEST_CASE("f_map") {
  const auto cloud = sample_uniform(30, 1, 8);
  const auto part = estimate_delta_n(cloud).partition;
  const auto grid = regular_grid(part.kappa, 1);
  const auto f = f_map(AtomicMeasure::uniform(grid.points()), 0.02, part);
  CHECK((f.values().array() - 1.0).abs().maxCoeff() < 1e-10);
  Rng rng(12);
  const auto g = f_map(random_measure(4, 1, rng), 0.02, part);
  CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.values().minCoeff() > 0.0);
}
