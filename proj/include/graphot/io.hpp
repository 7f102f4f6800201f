#pragma once

// File formats.
//   point cloud   CSV with header x0,...,x{d-1}; or JSON {dim, n, seed, points}
//   graph         CSV i,j,weight, one row per unordered pair (self pairs included)
//   measure       CSV with header x0,...,x{d-1},mass
//   grid density  first line JSON {"kappa":K,"d":D}, then kappa^{d-1} rows of kappa values
//   density       one value per line

#include "graphot/continuum_ot.hpp"
#include "graphot/discrete_ot.hpp"
#include "graphot/graph.hpp"
#include "graphot/torus.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

namespace graphot {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_csv(std::istream& in);
nlohmann::json cloud_to_json(const PointCloud& cloud);
PointCloud cloud_from_json(const nlohmann::json& j);

void write_graph_csv(std::ostream& out, const GeometricGraph& g);
/// The node count is one more than the largest index seen.
GeometricGraph read_graph_csv(std::istream& in, double eps);

void write_measure_csv(std::ostream& out, const AtomicMeasure& mu);
AtomicMeasure read_measure_csv(std::istream& in);

void write_grid_density(std::ostream& out, const GridDensity& rho);
GridDensity read_grid_density(std::istream& in);

void write_density(std::ostream& out, const Eigen::VectorXd& rho);
/// Skips a non-numeric first line.
Eigen::VectorXd read_density(std::istream& in);

nlohmann::json report_to_json(const SolveReport& report);

/// Open helpers that throw FormatError with the path on failure.
std::ifstream open_input(const std::string& path);
std::ofstream open_output(const std::string& path);

}  // namespace graphot
