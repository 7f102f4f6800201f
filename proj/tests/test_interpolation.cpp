#include "graphot/interpolation.hpp"
#include "graphot/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace graphot;

namespace {

// composite Simpson for int_0^1 dt / sqrt(theta(1-t, t)), folded at 1/2 and
// substituted t = x^4 / 2 so the endpoint singularity flattens out
double simpson_c_theta(const InterpolationFn& f, int panels) {
  auto g = [&](double x) {
    if (x == 0.0) return 0.0;
    const double t = 0.5 * x * x * x * x;
    return 2.0 * x * x * x / std::sqrt(f(1.0 - t, t));
  };
  const double h = 1.0 / panels;
  double s = g(0.0) + g(1.0);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * g(k * h);
  return 2.0 * s * h / 3.0;
}

}  // namespace

TEST_CASE("values of the two means") {
  const auto t1 = InterpolationFn::arithmetic();
  const auto t2 = InterpolationFn::logarithmic();
  CHECK(eval_theta(t2, 1.0, 1.0) == 1.0);
  CHECK(eval_theta(t1, 2.0, 4.0) == 3.0);
  CHECK(eval_theta(t2, 1.0, 0.0) == 0.0);
  CHECK(eval_theta(t2, 2.0, 2.0) == doctest::Approx(2.0));
  CHECK(eval_theta(t2, std::exp(1.0), 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  // r and r(1 + 1e-9) must not lose digits
  CHECK(eval_theta(t2, 1.0, 1.0 + 1e-9) == doctest::Approx(1.0 + 0.5e-9).epsilon(1e-15));
  CHECK_THROWS_AS(eval_theta(t1, -1.0, 1.0), std::invalid_argument);
  CHECK(InterpolationFn::from_name("logarithmic").kind() == ThetaKind::Logarithmic);
  CHECK_THROWS_AS(InterpolationFn::from_name("geometric"), std::invalid_argument);
}

TEST_CASE("logarithmic mean sits between geometric and arithmetic means") {
  const auto t2 = InterpolationFn::logarithmic();
  for (double r : {0.01, 0.3, 1.0, 7.0})
    for (double s : {0.02, 0.5, 2.0, 40.0}) {
      CHECK(t2(r, s) >= std::sqrt(r * s) * (1 - 1e-12));
      CHECK(t2(r, s) <= 0.5 * (r + s) * (1 + 1e-12));
    }
}

TEST_CASE("derivative of the logarithmic mean") {
  const auto t2 = InterpolationFn::logarithmic();
  for (double r : {0.2, 1.0, 3.0})
    for (double s : {0.1, 1.0, 1.0 + 1e-7, 5.0}) {
      const double h = 1e-6 * r;
      const double fd = (t2(r + h, s) - t2(r - h, s)) / (2 * h);
      CHECK(t2.d_first(r, s) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("C_theta") {
  CHECK(c_theta(InterpolationFn::arithmetic()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

  const auto t2 = InterpolationFn::logarithmic();
  const double s1 = simpson_c_theta(t2, 4000), s2 = simpson_c_theta(t2, 8000);
  const double oracle = s2 + (s2 - s1) / 15.0;
  CHECK(std::abs(s2 - s1) < 1e-7);
  CHECK(c_theta(t2) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(t2.c_theta_cached() == doctest::Approx(oracle).epsilon(1e-9));

  // int_0^1 dt / sqrt(min(1-t, t)) = 2 sqrt 2
  const auto mn = InterpolationFn::custom("min", [](double r, double s) { return std::min(r, s); });
  CHECK(c_theta(mn) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-8));

  const auto sq = InterpolationFn::custom("min2", [](double r, double s) {
    const double m = std::min(r, s);
    return m * m / (0.5 * (r + s));
  });
  CHECK_THROWS_AS(c_theta(sq), InfiniteCThetaError);
}

TEST_CASE("gauss-legendre rule integrates polynomials") {
  const auto rule = gauss_legendre(8);
  for (int p = 0; p <= 15; ++p) {
    double s = 0.0;
    for (int k = 0; k < 8; ++k) s += rule.weights[k] * std::pow(rule.nodes[k], p);
    const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    CHECK(s == doctest::Approx(exact).scale(1.0).epsilon(1e-14));
  }
  const auto q = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10);
  CHECK(q.value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("property validation") {
  CHECK(validate_properties(InterpolationFn::arithmetic(), 2000).ok());
  CHECK(validate_properties(InterpolationFn::logarithmic(), 2000).ok());

  const auto first = InterpolationFn::custom("first", [](double r, double) { return r; });
  const auto rep = validate_properties(first, 500);
  REQUIRE_FALSE(rep.ok());
  bool symmetric_flagged = false;
  for (const auto& v : rep.violations)
    if (v.property == "symmetry") {
      symmetric_flagged = true;
      REQUIRE(v.witness.size() >= 2);
      CHECK(first(v.witness[0], v.witness[1]) != first(v.witness[1], v.witness[0]));
    }
  CHECK(symmetric_flagged);

  const auto doubled = InterpolationFn::custom("twice", [](double r, double s) { return r + s; });
  bool norm_flagged = false;
  for (const auto& v : validate_properties(doubled, 200).violations) norm_flagged |= v.property == "normalization";
  CHECK(norm_flagged);

  const auto convex = InterpolationFn::custom("rms", [](double r, double s) { return std::sqrt(0.5 * (r * r + s * s)); });
  bool concave_flagged = false;
  for (const auto& v : validate_properties(convex, 2000).violations) concave_flagged |= v.property == "concavity";
  CHECK(concave_flagged);
}
