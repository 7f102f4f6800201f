// graphot: command-line front end.
// Exit codes: 0 success, 1 runtime failure, 2 configuration/input error,
// 3 too many solver failures in an experiment.

#include "graphot/continuum_ot.hpp"
#include "graphot/discrete_ot.hpp"
#include "graphot/experiments.hpp"
#include "graphot/graph.hpp"
#include "graphot/interpolation.hpp"
#include "graphot/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>

using namespace graphot;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailures = 3;

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    auto out = open_output(path);
    out << j.dump(2) << "\n";
  }
}

json load_json(const std::string& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("'" + item + "' is not an integer");
    }
  }
  return out;
}

PointCloud load_cloud(const std::string& path) {
  auto in = open_input(path);
  if (ends_with(path, ".json")) {
    try {
      return cloud_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw FormatError("'" + path + "': " + e.what());
    }
  }
  return read_cloud_csv(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete dynamic optimal transport on geometric graphs over the flat torus"};
  app.require_subcommand(1);

  // sample
  int s_n = 100, s_d = 1;
  std::uint64_t s_seed = 0;
  std::string s_out;
  auto* sample = app.add_subcommand("sample", "Draw a uniform point cloud (CSV, or JSON for *.json)");
  sample->add_option("--n", s_n, "number of points")->check(CLI::NonNegativeNumber);
  sample->add_option("--d", s_d, "dimension")->check(CLI::PositiveNumber);
  sample->add_option("--seed", s_seed, "random seed");
  sample->add_option("--out", s_out, "output path (stdout if absent)");

  // graph
  std::string g_cloud, g_out;
  double g_eps = 0.0;
  auto* graph = app.add_subcommand("graph", "Build the eps-neighborhood graph and export its edge list");
  graph->add_option("--cloud", g_cloud, "point cloud (CSV or JSON)")->required();
  graph->add_option("--eps", g_eps, "connectivity radius")->required();
  graph->add_option("--out", g_out, "edge CSV path (stdout if absent)");

  // wn
  std::string w_graph, w_theta = "logarithmic", w_rho0, w_rho1, w_out;
  double w_eps = 1.0, w_tol = 1e-6;
  int w_T = 32, w_max_iter = 20000;
  auto* wn = app.add_subcommand("wn", "Discrete transport distance between two node densities");
  wn->add_option("--graph", w_graph, "edge CSV i,j,weight")->required();
  wn->add_option("--eps", w_eps, "graph length scale used by gradient and divergence");
  wn->add_option("--theta", w_theta, "interpolating function")
      ->check(CLI::IsMember({"arithmetic", "logarithmic"}));
  wn->add_option("--rho0", w_rho0, "start density, one value per line")->required();
  wn->add_option("--rho1", w_rho1, "end density, one value per line")->required();
  wn->add_option("--T", w_T, "time steps")->check(CLI::PositiveNumber);
  wn->add_option("--tol", w_tol, "relative objective tolerance");
  wn->add_option("--max-iter", w_max_iter, "iteration cap")->check(CLI::PositiveNumber);
  wn->add_option("--out", w_out, "report JSON path (stdout if absent)");

  // w2 / dinf
  std::string m_mu, m_nu, m_out;
  auto* w2 = app.add_subcommand("w2", "Exact W2 between two atomic measures (CSV x0..,mass)");
  w2->add_option("--mu", m_mu)->required();
  w2->add_option("--nu", m_nu)->required();
  w2->add_option("--out", m_out);
  auto* dinf = app.add_subcommand("dinf", "Bottleneck distance between two uniform atomic measures");
  dinf->add_option("--mu", m_mu)->required();
  dinf->add_option("--nu", m_nu)->required();
  dinf->add_option("--out", m_out);

  // heat
  std::string h_mu, h_out;
  double h_s = 0.01;
  int h_kappa = 64;
  auto* heat = app.add_subcommand("heat", "Heat-smoothed grid density of an atomic measure");
  heat->add_option("--mu", h_mu)->required();
  heat->add_option("--s", h_s, "heat time")->required();
  heat->add_option("--kappa", h_kappa, "grid points per axis")->check(CLI::PositiveNumber);
  heat->add_option("--out", h_out, "grid density path (stdout if absent)");

  // experiments
  std::string c_config;
  auto* converge = app.add_subcommand("converge", "Distortion study across n");
  converge->add_option("--config", c_config, "experiment JSON")->required();
  auto* eigen = app.add_subcommand("eigen", "Spectral gap across n");
  eigen->add_option("--config", c_config, "experiment JSON")->required();

  std::string d_list = "2,4,8,16,32", d_theta = "logarithmic", d_out;
  int d_T = 32;
  auto* diameter = app.add_subcommand("diameter", "Complete-graph diameter estimates with a sqrt(log N) fit");
  diameter->add_option("--N", d_list, "comma-separated node counts");
  diameter->add_option("--theta", d_theta)->check(CLI::IsMember({"arithmetic", "logarithmic"}));
  diameter->add_option("--T", d_T, "time steps")->check(CLI::PositiveNumber);
  diameter->add_option("--out", d_out, "CSV path (stdout if absent)");

  int k_d = 2, k_points = 24;
  double k_eps = 0.2;
  auto* moments = app.add_subcommand("moments", "Kernel second-moment constant check");
  moments->add_option("--d", k_d)->check(CLI::Range(1, 3));
  moments->add_option("--eps", k_eps);
  moments->add_option("--points", k_points, "Gauss-Legendre points per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sample) {
      const PointCloud cloud = sample_uniform(s_n, s_d, s_seed);
      if (ends_with(s_out, ".json")) {
        emit_json(cloud_to_json(cloud), s_out);
      } else if (s_out.empty()) {
        write_cloud_csv(std::cout, cloud);
      } else {
        auto out = open_output(s_out);
        write_cloud_csv(out, cloud);
      }
    } else if (*graph) {
      const GeometricGraph g = build_graph(load_cloud(g_cloud), g_eps);
      if (g_out.empty()) {
        write_graph_csv(std::cout, g);
      } else {
        auto out = open_output(g_out);
        write_graph_csv(out, g);
      }
      std::cerr << "nodes " << g.size() << ", edges " << g.edge_count() << ", components "
                << g.components().size() << "\n";
    } else if (*wn) {
      auto gin = open_input(w_graph);
      const GeometricGraph g = read_graph_csv(gin, w_eps);
      auto r0 = open_input(w_rho0);
      auto r1 = open_input(w_rho1);
      const DiscreteDensity rho0(read_density(r0)), rho1(read_density(r1));
      SolverOptions opt;
      opt.steps = w_T;
      opt.rel_tol = w_tol;
      opt.max_iter = w_max_iter;
      const SolveReport rep = solve_wn(g, InterpolationFn::from_name(w_theta), rho0, rho1, opt);
      emit_json(report_to_json(rep), w_out);
    } else if (*w2) {
      auto a = open_input(m_mu);
      auto b = open_input(m_nu);
      const TransportPlan plan = wasserstein2_plan(read_measure_csv(a), read_measure_csv(b));
      emit_json({{"distance", std::sqrt(std::max(0.0, plan.cost))},
                 {"cost", plan.cost},
                 {"iterations", plan.iterations},
                 {"min_reduced_cost", plan.min_reduced_cost},
                 {"marginal_error", plan.marginal_error}},
                m_out);
    } else if (*dinf) {
      auto a = open_input(m_mu);
      auto b = open_input(m_nu);
      const BottleneckMatching bm = bottleneck_dinf(read_measure_csv(a), read_measure_csv(b));
      emit_json({{"delta", bm.delta}, {"assignment", bm.assignment}}, m_out);
    } else if (*heat) {
      auto in = open_input(h_mu);
      const GridDensity rho = heat_smooth(read_measure_csv(in), h_s, h_kappa);
      if (h_out.empty()) {
        write_grid_density(std::cout, rho);
      } else {
        auto out = open_output(h_out);
        write_grid_density(out, rho);
      }
    } else if (*converge) {
      const ExperimentConfig cfg = ExperimentConfig::from_json(load_json(c_config));
      const DistortionReport rep = run_convergence(cfg);
      const json summary = summary_to_json(rep, cfg);
      if (cfg.output.empty()) {
        write_rows_csv(std::cout, rep);
        std::cout << summary.dump(2) << "\n";
      } else {
        auto rows = open_output(cfg.output + ".rows.csv");
        write_rows_csv(rows, rep);
        emit_json(summary, cfg.output + ".summary.json");
      }
      if (rep.excessive_failures()) {
        std::cerr << "graphot: " << rep.failures << " of " << rep.attempted << " solves did not converge\n";
        return kExitFailures;
      }
    } else if (*eigen) {
      const ExperimentConfig cfg = ExperimentConfig::from_json(load_json(c_config));
      std::ostringstream table;
      table << std::setprecision(17) << "n,eps,lambda,residual,iterations\n";
      for (const auto& r : run_eigen_study(cfg))
        table << r.n << "," << r.eps << "," << r.lambda << "," << r.residual << "," << r.iterations << "\n";
      if (cfg.output.empty()) {
        std::cout << table.str();
      } else {
        auto out = open_output(cfg.output + ".eigen.csv");
        out << table.str();
      }
    } else if (*diameter) {
      SolverOptions opt;
      opt.steps = d_T;
      const DiameterTable t = run_diameter_study(parse_int_list(d_list), InterpolationFn::from_name(d_theta), opt);
      std::ostringstream table;
      table << std::setprecision(12) << "N,estimate,dirac_to_uniform,dirac_to_dirac,fit,residual,converged\n";
      for (const auto& r : t.rows)
        table << r.N << "," << r.estimate << "," << r.dirac_to_uniform << "," << r.dirac_to_dirac << "," << r.fit
              << "," << r.residual << "," << (r.converged ? 1 : 0) << "\n";
      if (d_out.empty()) {
        std::cout << table.str();
      } else {
        auto out = open_output(d_out);
        out << table.str();
      }
      std::cerr << "fit: " << t.coefficient << " * sqrt(log N)\n";
    } else if (*moments) {
      const MomentCheck mc = kernel_moment_check(k_d, k_eps, k_points);
      emit_json({{"d", mc.d},
                 {"eps", mc.eps},
                 {"alpha_sigma", mc.expected},
                 {"second_moments", mc.second_moments},
                 {"max_rel_error", mc.max_rel_error},
                 {"first_moment_error", mc.first_moment_error},
                 {"position_spread", mc.position_spread}},
                "");
    }
  } catch (const ConfigError& e) {
    std::cerr << "graphot: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "graphot: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "graphot: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "graphot: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
