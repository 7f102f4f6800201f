#include "graphot/matching.hpp"
#include "graphot/torus.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace graphot;

TEST_CASE("torus distance wraps around") {
  CHECK(torus_distance(TorusPoint{0.1}, TorusPoint{0.9}) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(torus_distance(TorusPoint{0.0, 0.0}, TorusPoint{0.5, 0.5}) == doctest::Approx(std::sqrt(0.5)));
  CHECK(torus_distance(TorusPoint{0.3, 0.7}, TorusPoint{0.3, 0.7}) == 0.0);
  CHECK_THROWS_AS(torus_distance(TorusPoint{0.1}, TorusPoint{0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("coordinates are reduced into [0,1)") {
  TorusPoint p{-0.25, 1.5, 3.0};
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == 0.0);
  CHECK(wrap_unit(-1e-20) < 1.0);
}

TEST_CASE("distance is a metric bounded by sqrt(d)/2") {
  for (int d = 1; d <= 3; ++d) {
    const auto c = sample_uniform(40, d, 7 + d);
    for (int i = 0; i < c.size(); ++i)
      for (int j = 0; j < c.size(); ++j) {
        const double dij = torus_distance(c[i], c[j]);
        CHECK(dij <= std::sqrt(d) / 2 + 1e-15);
        CHECK(dij == torus_distance(c[j], c[i]));
        const int k = (i * 7 + j) % c.size();
        CHECK(dij <= torus_distance(c[i], c[k]) + torus_distance(c[k], c[j]) + 1e-14);
      }
  }
}

TEST_CASE("sampling is deterministic and uniform") {
  CHECK(sample_uniform(0, 2, 1).empty());
  const auto a = sample_uniform(500, 2, 42), b = sample_uniform(500, 2, 42);
  for (int i = 0; i < a.size(); ++i) CHECK(a[i].coords() == b[i].coords());
  CHECK(a.seed().value() == 42);
  const auto c = sample_uniform(500, 2, 43);
  CHECK(a[0].coords() != c[0].coords());

  // mean of each coordinate within 5 standard errors of 1/2
  const auto big = sample_uniform(20000, 3, 5);
  for (int k = 0; k < 3; ++k) {
    double m = 0.0;
    for (const auto& p : big.points()) m += p[k];
    m /= big.size();
    CHECK(std::abs(m - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / big.size()));
  }
}

TEST_CASE("regular grid layout") {
  const auto g1 = regular_grid(2, 1);
  REQUIRE(g1.size() == 2);
  CHECK(g1[0][0] == 0.0);
  CHECK(g1[1][0] == 0.5);
  const auto g2 = regular_grid(3, 2);
  REQUIRE(g2.size() == 9);
  CHECK(g2[1][1] == doctest::Approx(1.0 / 3.0));
  CHECK(g2[1][0] == 0.0);
  CHECK(g2[3][0] == doctest::Approx(1.0 / 3.0));
  for (int i = 0; i < 9; ++i)
    for (int j = i + 1; j < 9; ++j) CHECK(torus_distance(g2[i], g2[j]) >= 1.0 / 3.0 - 1e-15);
}

TEST_CASE("coarse grid against fine grid in d_inf") {
  // each coarse point takes 100 fine points, the farthest sits about 1/8 away
  const auto coarse = regular_grid(4, 1), fine = regular_grid(400, 1);
  const auto m = bottleneck_assignment(fine.points(), coarse.points(), 100);
  CHECK(m.delta <= 1.0 / 8 + 1.0 / 800 + 1e-12);
  CHECK(m.delta >= 1.0 / 8 - 1.0 / 800 - 1e-12);
}

TEST_CASE("rng streams") {
  Rng a(3), b(3), c(3, 1);
  CHECK(a() == b());
  CHECK(Rng(3).split(1).key() != Rng(3).split(2).key());
  CHECK(Rng(3).key() != c.key());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(a.below(7) < 7u);
  }
}
