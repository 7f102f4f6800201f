#include "graphot/torus.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace graphot {

double wrap_unit(double x) {
  double r = x - std::floor(x);
  // floor can round x - floor(x) up to exactly 1 for tiny negative x
  if (r >= 1.0) r = 0.0;
  return r;
}

TorusPoint::TorusPoint(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  for (Eigen::Index i = 0; i < coords_.size(); ++i) coords_[i] = wrap_unit(coords_[i]);
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(Eigen::Map<const Eigen::VectorXd>(coords.begin(),
                                                   static_cast<Eigen::Index>(coords.size()))) {}

Eigen::VectorXd torus_displacement(const TorusPoint& p, const TorusPoint& q) {
  if (p.dim() != q.dim())
    throw std::invalid_argument("torus_displacement: dimension mismatch (" +
                                std::to_string(p.dim()) + " vs " + std::to_string(q.dim()) + ")");
  Eigen::VectorXd d = q.coords() - p.coords();
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] -= std::round(d[i]);
  return d;
}

double torus_distance(const TorusPoint& p, const TorusPoint& q) {
  if (p.dim() != q.dim())
    throw std::invalid_argument("torus_distance: dimension mismatch (" + std::to_string(p.dim()) +
                                " vs " + std::to_string(q.dim()) + ")");
  double acc = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    double d = q[i] - p[i];
    d -= std::round(d);
    acc += d * d;
  }
  return std::sqrt(acc);
}

PointCloud::PointCloud(int dim, std::vector<TorusPoint> points, std::optional<std::uint64_t> seed)
    : dim_(dim), points_(std::move(points)), seed_(seed) {
  if (dim < 1) throw std::invalid_argument("PointCloud: dimension must be >= 1");
  for (const auto& p : points_)
    if (p.dim() != dim) throw std::invalid_argument("PointCloud: mixed point dimensions");
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))), engine_(key_) {}

Rng Rng::split(std::uint64_t child) const { return Rng(key_, child); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // rejection sampling keeps the result unbiased
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

PointCloud sample_uniform(int n, int dim, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample_uniform: n must be >= 0");
  if (dim < 1) throw std::invalid_argument("sample_uniform: dimension must be >= 1");
  Rng rng(seed);
  std::vector<TorusPoint> pts;
  pts.reserve(n);
  Eigen::VectorXd c(dim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) c[k] = rng.uniform();
    pts.emplace_back(c);
  }
  return PointCloud(dim, std::move(pts), seed);
}

PointCloud regular_grid(int kappa, int dim) {
  if (kappa < 1) throw std::invalid_argument("regular_grid: kappa must be >= 1");
  if (dim < 1) throw std::invalid_argument("regular_grid: dimension must be >= 1");
  long total = 1;
  for (int k = 0; k < dim; ++k) total *= kappa;
  std::vector<TorusPoint> pts;
  pts.reserve(total);
  Eigen::VectorXd c(dim);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = dim - 1; k >= 0; --k) {
      c[k] = static_cast<double>(rem % kappa) / kappa;
      rem /= kappa;
    }
    pts.emplace_back(c);
  }
  return PointCloud(dim, std::move(pts));
}

}  // namespace graphot
