#pragma once

// One-dimensional quadrature shared by the interpolation and experiment
// modules.

#include <Eigen/Core>

#include <functional>

namespace graphot {

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussRule gauss_legendre(int points);

struct QuadResult {
  double value;
  double error;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [a, b].
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol = 1e-12, int max_intervals = 2000);

}  // namespace graphot
