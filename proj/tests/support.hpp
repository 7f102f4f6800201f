#pragma once

#include "graphot/discrete_ot.hpp"
#include "graphot/graph.hpp"
#include "graphot/torus.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>

namespace testsupport {

// connected eps-graph on a uniform sample; retries with later seeds
inline graphot::GeometricGraph connected_graph(int n, int d, double eps, std::uint64_t seed) {
  for (std::uint64_t s = seed; s < seed + 200; ++s) {
    auto g = graphot::build_graph(graphot::sample_uniform(n, d, s), eps);
    if (g.connected()) return g;
  }
  throw std::runtime_error("connected_graph: no connected sample for these parameters");
}

inline Eigen::VectorXd random_values(int n, graphot::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.uniform();
  return v;
}

// strictly positive density with mean one
inline graphot::DiscreteDensity random_density(int n, graphot::Rng& rng, double floor = 0.05) {
  Eigen::VectorXd v = random_values(n, rng, floor, 1.0);
  v /= v.mean();
  return graphot::DiscreteDensity(v);
}

inline graphot::EdgeField random_field(const graphot::GeometricGraph& g, graphot::Rng& rng) {
  graphot::EdgeField v(g.edge_count());
  v.forward = random_values(g.edge_count(), rng);
  v.backward = random_values(g.edge_count(), rng);
  return v;
}

}  // namespace testsupport
