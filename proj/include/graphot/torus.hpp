#pragma once

// Flat unit torus T^d = R^d / Z^d: points, periodic distance, point clouds,
// uniform sampling and regular grids.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace graphot {

/// A point of the unit torus. Coordinates are reduced into [0, 1) on construction.
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(Eigen::VectorXd coords);
  TorusPoint(std::initializer_list<double> coords);

  int dim() const { return static_cast<int>(coords_.size()); }
  const Eigen::VectorXd& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

 private:
  Eigen::VectorXd coords_;
};

/// Reduce a real number into [0, 1).
double wrap_unit(double x);

/// Nearest-image displacement q - p with every component in [-0.5, 0.5].
Eigen::VectorXd torus_displacement(const TorusPoint& p, const TorusPoint& q);

/// Periodic Euclidean distance; throws std::invalid_argument on dimension mismatch.
double torus_distance(const TorusPoint& p, const TorusPoint& q);

/// Point cloud X_n with its empirical measure (mass 1/n per point).
class PointCloud {
 public:
  PointCloud(int dim, std::vector<TorusPoint> points,
             std::optional<std::uint64_t> seed = std::nullopt);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(points_.size()); }
  bool empty() const { return points_.empty(); }
  const TorusPoint& operator[](int i) const { return points_[i]; }
  const std::vector<TorusPoint>& points() const { return points_; }
  const std::optional<std::uint64_t>& seed() const { return seed_; }

  /// Mass of each point under the empirical measure.
  double point_mass() const { return 1.0 / static_cast<double>(size()); }

 private:
  int dim_;
  std::vector<TorusPoint> points_;
  std::optional<std::uint64_t> seed_;
};

// Random streams. A stream is identified by (seed, stream id); `split`
// derives a child stream so parallel experiments never share state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng split(std::uint64_t child) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to derive stream keys.
std::uint64_t mix64(std::uint64_t x);

/// n i.i.d. uniform points on T^d; deterministic given the seed.
PointCloud sample_uniform(int n, int dim, std::uint64_t seed);

/// kappa^d points at coordinates (i_1/kappa, ..., i_d/kappa), last axis fastest.
PointCloud regular_grid(int kappa, int dim);

}  // namespace graphot
