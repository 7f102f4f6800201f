#include "graphot/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace graphot {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
  }
  return out;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw FormatError("line " + std::to_string(line) + ": '" + s + "' is not a number");
  return v;
}

int parse_int(const std::string& s, int line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw FormatError("line " + std::to_string(line) + ": '" + s + "' is not an integer");
  return v;
}

bool looks_numeric(const std::string& s) {
  double v;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// header x0..x{d-1}[,extra]; returns d
int check_coordinate_header(const std::vector<std::string>& head, const std::string& extra) {
  const int d = static_cast<int>(head.size()) - (extra.empty() ? 0 : 1);
  if (d < 1) throw FormatError("header: no coordinate columns");
  for (int k = 0; k < d; ++k)
    if (head[k] != "x" + std::to_string(k))
      throw FormatError("header: expected column x" + std::to_string(k) + ", found '" + head[k] + "'");
  if (!extra.empty() && head.back() != extra)
    throw FormatError("header: expected last column '" + extra + "'");
  return d;
}

std::ostream& full_precision(std::ostream& out) { return out << std::setprecision(17); }

}  // namespace

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  full_precision(out);
  for (int k = 0; k < cloud.dim(); ++k) out << (k ? "," : "") << "x" << k;
  out << "\n";
  for (const auto& p : cloud.points()) {
    for (int k = 0; k < cloud.dim(); ++k) out << (k ? "," : "") << p[k];
    out << "\n";
  }
}

PointCloud read_cloud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("cloud CSV: empty input");
  const int d = check_coordinate_header(split_csv(line), "");
  std::vector<TorusPoint> pts;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != d)
      throw FormatError("cloud CSV line " + std::to_string(ln) + ": expected " + std::to_string(d) + " columns");
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x[k] = parse_double(cells[k], ln);
    pts.emplace_back(std::move(x));
  }
  return PointCloud(d, std::move(pts));
}

nlohmann::json cloud_to_json(const PointCloud& cloud) {
  nlohmann::json j;
  j["dim"] = cloud.dim();
  j["n"] = cloud.size();
  j["seed"] = cloud.seed() ? nlohmann::json(*cloud.seed()) : nlohmann::json(nullptr);
  auto pts = nlohmann::json::array();
  for (const auto& p : cloud.points()) pts.push_back(std::vector<double>(p.coords().data(), p.coords().data() + p.dim()));
  j["points"] = std::move(pts);
  return j;
}

PointCloud cloud_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("dim").get<int>();
    std::vector<TorusPoint> pts;
    for (const auto& row : j.at("points")) {
      const auto v = row.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != d) throw FormatError("cloud JSON: point of wrong dimension");
      pts.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), d));
    }
    if (j.contains("n") && j.at("n").get<int>() != static_cast<int>(pts.size()))
      throw FormatError("cloud JSON: n does not match the number of points");
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
    return PointCloud(d, std::move(pts), seed);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cloud JSON: ") + e.what());
  }
}

void write_graph_csv(std::ostream& out, const GeometricGraph& g) {
  full_precision(out);
  out << "i,j,weight\n";
  for (int i = 0; i < g.size(); ++i) out << i << "," << i << "," << g.self_weight(i) << "\n";
  for (const auto& e : g.edges()) out << e.i << "," << e.j << "," << e.weight << "\n";
}

GeometricGraph read_graph_csv(std::istream& in, double eps) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("graph CSV: empty input");
  const auto head = split_csv(line);
  if (head != std::vector<std::string>{"i", "j", "weight"}) throw FormatError("graph CSV: header must be i,j,weight");
  std::vector<Edge> edges;
  std::vector<std::pair<int, double>> selfs;
  int n = 0, ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto c = split_csv(line);
    if (c.size() != 3) throw FormatError("graph CSV line " + std::to_string(ln) + ": expected 3 columns");
    const int i = parse_int(c[0], ln), j = parse_int(c[1], ln);
    const double w = parse_double(c[2], ln);
    if (i < 0 || j < 0 || w < 0.0) throw FormatError("graph CSV line " + std::to_string(ln) + ": negative entry");
    n = std::max({n, i + 1, j + 1});
    if (i == j)
      selfs.emplace_back(i, w);
    else
      edges.push_back({std::min(i, j), std::max(i, j), w});
  }
  std::vector<double> self(n, 0.0);
  for (auto [i, w] : selfs) self[i] = w;
  return GeometricGraph::from_weights(n, eps, edges, self);
}

void write_measure_csv(std::ostream& out, const AtomicMeasure& mu) {
  full_precision(out);
  for (int k = 0; k < mu.dim(); ++k) out << "x" << k << ",";
  out << "mass\n";
  for (int a = 0; a < mu.size(); ++a) {
    for (int k = 0; k < mu.dim(); ++k) out << mu.atoms()[a][k] << ",";
    out << mu.masses()[a] << "\n";
  }
}

AtomicMeasure read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("measure CSV: empty input");
  const int d = check_coordinate_header(split_csv(line), "mass");
  std::vector<TorusPoint> atoms;
  std::vector<double> masses;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto c = split_csv(line);
    if (static_cast<int>(c.size()) != d + 1)
      throw FormatError("measure CSV line " + std::to_string(ln) + ": expected " + std::to_string(d + 1) + " columns");
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x[k] = parse_double(c[k], ln);
    atoms.emplace_back(std::move(x));
    masses.push_back(parse_double(c[d], ln));
  }
  return AtomicMeasure(std::move(atoms), std::move(masses));
}

void write_grid_density(std::ostream& out, const GridDensity& rho) {
  full_precision(out);
  out << nlohmann::json{{"kappa", rho.kappa()}, {"d", rho.dim()}}.dump() << "\n";
  const int k = rho.kappa();
  for (int m = 0; m < rho.size(); ++m) out << rho.values()[m] << ((m + 1) % k == 0 ? "\n" : ",");
}

GridDensity read_grid_density(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("grid density: empty input");
  int kappa = 0, d = 0;
  try {
    const auto head = nlohmann::json::parse(line);
    kappa = head.at("kappa").get<int>();
    d = head.at("d").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("grid density header: ") + e.what());
  }
  std::vector<double> v;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto c = split_csv(line);
    if (static_cast<int>(c.size()) != kappa)
      throw FormatError("grid density line " + std::to_string(ln) + ": expected " + std::to_string(kappa) + " values");
    for (const auto& s : c) v.push_back(parse_double(s, ln));
  }
  return GridDensity(kappa, d, Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), 1e-9);
}

void write_density(std::ostream& out, const Eigen::VectorXd& rho) {
  full_precision(out);
  for (Eigen::Index i = 0; i < rho.size(); ++i) out << rho[i] << "\n";
}

Eigen::VectorXd read_density(std::istream& in) {
  std::vector<double> v;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto c = split_csv(line);
    if (c.empty() || c[0].empty()) continue;
    if (ln == 1 && !looks_numeric(c[0])) continue;
    v.push_back(parse_double(c[0], ln));
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json report_to_json(const SolveReport& r) {
  return {{"distance_upper", r.distance_upper}, {"action", r.action},     {"feas_residual", r.feas_residual},
          {"gap_estimate", r.gap_estimate},     {"iterations", r.iterations}, {"converged", r.converged},
          {"T", r.steps},                       {"theta", r.theta},       {"diagnostic", r.diagnostic}};
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace graphot
