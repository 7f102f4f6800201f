#pragma once

// Interpolating functions theta(r, s): the "edge density" built from the
// densities at the two endpoints of an edge. Admissible functions are
// symmetric, monotone, 1-homogeneous, normalized (theta(1,1) = 1), jointly
// concave, and have a finite C_theta = int_0^1 dt / sqrt(theta(1-t, t)).

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphot {

enum class ThetaKind { Arithmetic, Logarithmic, Custom };

class InterpolationFn {
 public:
  using Evaluator = std::function<double(double, double)>;

  static InterpolationFn arithmetic();
  static InterpolationFn logarithmic();
  /// A user-supplied theta. Without a derivative, partial derivatives fall
  /// back to central differences.
  static InterpolationFn custom(std::string name, Evaluator eval, Evaluator d_first = {});

  /// "arithmetic" | "logarithmic"; throws std::invalid_argument otherwise.
  static InterpolationFn from_name(const std::string& name);

  ThetaKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  double operator()(double r, double s) const;
  /// d theta / d r at (r, s).
  double d_first(double r, double s) const;

  /// Memoized C_theta (computed on first request).
  double c_theta_cached() const;

 private:
  InterpolationFn(ThetaKind kind, std::string name, Evaluator eval, Evaluator d_first);

  ThetaKind kind_;
  std::string name_;
  Evaluator eval_;
  Evaluator d_first_;
  mutable std::optional<double> c_theta_cache_;
};

/// theta(r, s); throws std::invalid_argument for negative arguments.
double eval_theta(const InterpolationFn& f, double r, double s);

/// (r + s) / 2
double arithmetic_mean(double r, double s);
/// (r - s) / (log r - log s), with theta(r, r) = r and theta(r, 0) = 0.
double logarithmic_mean(double r, double s);
double logarithmic_mean_d_first(double r, double s);

class InfiniteCThetaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// C_theta by adaptive Gauss-Kronrod quadrature after the substitution
/// t = u^2 / 2 at each endpoint. Throws InfiniteCThetaError when the dyadic
/// tail contributions fail to shrink or the running value passes `cap`.
double c_theta(const InterpolationFn& f, double quad_tol = 1e-10, double cap = 1e6);

struct PropertyViolation {
  std::string property;
  std::vector<double> witness;
  double defect;
};

struct PropertyReport {
  int samples = 0;
  std::vector<PropertyViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Randomized check of symmetry, monotonicity, homogeneity, normalization and
/// midpoint concavity. Each violation lists the sampled arguments.
PropertyReport validate_properties(const InterpolationFn& f, int samples = 10000,
                                   std::uint64_t seed = 0, double tol = 1e-10);

}  // namespace graphot
