#include "graphot/interpolation.hpp"

#include "graphot/quadrature.hpp"
#include "graphot/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graphot {

double arithmetic_mean(double r, double s) { return 0.5 * (r + s); }

double logarithmic_mean(double r, double s) {
  if (r == s) return r;
  if (r == 0.0 || s == 0.0) return 0.0;
  const double m = 0.5 * (r + s);
  const double z = (r - s) / (r + s);
  const double z2 = z * z;
  // the ratio form cancels catastrophically near the diagonal
  if (std::abs(z) < 1e-4) return m * (1.0 - z2 / 3.0 - 4.0 * z2 * z2 / 45.0);
  if (std::abs(z) < 0.5) return m * z / std::atanh(z);
  return (r - s) / (std::log(r) - std::log(s));
}

double logarithmic_mean_d_first(double r, double s) {
  if (s == 0.0) return 0.0;
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  const double z = (r - s) / (r + s);
  if (std::abs(z) < 1e-2) {
    const double z2 = z * z;
    const double h = 1.0 - z2 / 3.0 - 4.0 * z2 * z2 / 45.0 - 44.0 * z2 * z2 * z2 / 945.0;
    const double dh = -2.0 * z / 3.0 - 16.0 * z * z2 / 45.0 - 264.0 * z * z2 * z2 / 945.0;
    return 0.5 * (h + dh * (1.0 - z));
  }
  const double d = std::log(r) - std::log(s);
  return (1.0 - logarithmic_mean(r, s) / r) / d;
}

InterpolationFn::InterpolationFn(ThetaKind kind, std::string name, Evaluator eval, Evaluator d_first)
    : kind_(kind), name_(std::move(name)), eval_(std::move(eval)), d_first_(std::move(d_first)) {}

InterpolationFn InterpolationFn::arithmetic() {
  return InterpolationFn(ThetaKind::Arithmetic, "arithmetic", arithmetic_mean,
                         [](double, double) { return 0.5; });
}

InterpolationFn InterpolationFn::logarithmic() {
  return InterpolationFn(ThetaKind::Logarithmic, "logarithmic", logarithmic_mean,
                         logarithmic_mean_d_first);
}

InterpolationFn InterpolationFn::custom(std::string name, Evaluator eval, Evaluator d_first) {
  if (!eval) throw std::invalid_argument("InterpolationFn::custom: empty evaluator");
  return InterpolationFn(ThetaKind::Custom, std::move(name), std::move(eval), std::move(d_first));
}

InterpolationFn InterpolationFn::from_name(const std::string& name) {
  if (name == "arithmetic") return arithmetic();
  if (name == "logarithmic") return logarithmic();
  throw std::invalid_argument("unknown interpolating function '" + name +
                              "' (expected arithmetic or logarithmic)");
}

double InterpolationFn::operator()(double r, double s) const { return eval_(r, s); }

double InterpolationFn::d_first(double r, double s) const {
  if (d_first_) return d_first_(r, s);
  const double h = 1e-6 * std::max(r, 1e-12);
  const double lo = std::max(0.0, r - h);
  return (eval_(r + h, s) - eval_(lo, s)) / (r + h - lo);
}

double InterpolationFn::c_theta_cached() const {
  if (!c_theta_cache_) c_theta_cache_ = c_theta(*this);
  return *c_theta_cache_;
}

double eval_theta(const InterpolationFn& f, double r, double s) {
  if (r < 0.0 || s < 0.0 || std::isnan(r) || std::isnan(s))
    throw std::invalid_argument("eval_theta: arguments must be non-negative");
  return f(r, s);
}

namespace {

// int_0^{1/2} g(t) dt with t = u^2/2, split into dyadic pieces in u so an
// integrable endpoint singularity shows up as a geometrically shrinking tail.
double half_integral(const std::function<double(double)>& g, double quad_tol, double cap,
                     const std::string& name) {
  auto integrand = [&](double u) { return u * g(0.5 * u * u); };
  double total = 0.0;
  std::vector<double> pieces;
  for (int k = 0; k < 400; ++k) {
    const double hi = std::ldexp(1.0, -k);
    const double lo = 0.5 * hi;
    const double piece = integrate_adaptive(integrand, lo, hi, quad_tol * 1e-2, 1e-13).value;
    if (!std::isfinite(piece))
      throw InfiniteCThetaError("C_theta infinite for '" + name + "': non-finite integrand");
    total += piece;
    pieces.push_back(piece);
    if (total > cap)
      throw InfiniteCThetaError("C_theta infinite for '" + name + "': value exceeds cap");
    if (k >= 4) {
      const double ratio = piece / std::max(pieces[k - 1], std::numeric_limits<double>::min());
      // geometric tail bound piece * ratio / (1 - ratio)
      if (ratio < 0.9 && piece * ratio / (1.0 - ratio) < 0.25 * quad_tol) return total;
    }
    if (k >= 40 && piece >= 0.5 * pieces[k - 20])
      throw InfiniteCThetaError("C_theta infinite for '" + name + "': endpoint tail does not shrink");
  }
  throw InfiniteCThetaError("C_theta infinite for '" + name + "': tail did not converge");
}

}  // namespace

double c_theta(const InterpolationFn& f, double quad_tol, double cap) {
  auto left = [&](double t) { return 1.0 / std::sqrt(f(1.0 - t, t)); };
  auto right = [&](double t) { return 1.0 / std::sqrt(f(t, 1.0 - t)); };
  return half_integral(left, quad_tol, cap, f.name()) + half_integral(right, quad_tol, cap, f.name());
}

PropertyReport validate_properties(const InterpolationFn& f, int samples, std::uint64_t seed,
                                   double tol) {
  PropertyReport report;
  report.samples = samples;
  Rng rng(seed, 0x7468657461ULL);
  // log-uniform magnitudes in [1e-3, 1e3], with exact zeros now and then
  auto draw = [&]() {
    if (rng.below(50) == 0) return 0.0;
    return std::exp((rng.uniform() * 2.0 - 1.0) * std::log(1e3));
  };
  constexpr size_t kMaxWitnesses = 8;
  auto flag = [&](const std::string& prop, std::vector<double> witness, double defect) {
    size_t seen = 0;
    for (const auto& v : report.violations) seen += (v.property == prop);
    if (seen < kMaxWitnesses) report.violations.push_back({prop, std::move(witness), defect});
  };

  const double one = f(1.0, 1.0);
  if (std::abs(one - 1.0) > tol) flag("normalization", {1.0, 1.0}, std::abs(one - 1.0));

  for (int k = 0; k < samples; ++k) {
    const double r = draw(), s = draw(), t = draw();
    const double scale = 1.0 + std::max({r, s, t});
    const double frs = f(r, s);

    if (const double dsym = std::abs(frs - f(s, r)); dsym > tol * scale)
      flag("symmetry", {r, s}, dsym);

    const double lo = std::min(r, t), hi = std::max(r, t);
    if (const double dmono = f(lo, s) - f(hi, s); dmono > tol * scale)
      flag("monotonicity", {lo, hi, s}, dmono);

    const double lambda = std::exp((rng.uniform() * 2.0 - 1.0) * std::log(10.0));
    if (const double dhom = std::abs(f(lambda * r, lambda * s) - lambda * frs);
        dhom > tol * scale * std::max(1.0, lambda))
      flag("homogeneity", {r, s, lambda}, dhom);

    if (const double ddiag = std::abs(f(r, r) - r); ddiag > tol * scale)
      flag("normalization", {r, r}, ddiag);

    const double r2 = draw(), s2 = draw();
    const double mid = f(0.5 * (r + r2), 0.5 * (s + s2));
    const double chord = 0.5 * (frs + f(r2, s2));
    if (const double dconc = chord - mid; dconc > tol * (1.0 + std::max({r, s, r2, s2})))
      flag("concavity", {r, s, r2, s2}, dconc);
  }
  return report;
}

}  // namespace graphot
