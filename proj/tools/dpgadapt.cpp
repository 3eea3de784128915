// dpgadapt: solve, adapt and remesh driver.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 remesh failure, 1 anything else.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "dpg/adapt.hpp"
#include "dpg/config.hpp"
#include "dpg/report.hpp"

namespace fs = std::filesystem;
using namespace dpg;

namespace {

// Flags shared by every subcommand; stored as strings and applied through the
// config key table so that flag and file values are validated identically.
struct CommonFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override a configuration key (key=value), repeatable");
    const std::vector<std::pair<std::string, std::string>> flags{
        {"case", "test case name"},
        {"p", "trial polynomial degree"},
        {"dp", "test enrichment degree"},
        {"norm", "test norm: scaled or standard"},
        {"cycles", "number of adaptation steps"},
        {"n0", "initial complexity"},
        {"growth", "complexity factor per cycle"},
        {"mode", "solution or goal"},
        {"regularize", "floor the indicators before sizing (true/false)"},
        {"solver", "normal or dls"},
        {"remesher", "builtin or external"},
        {"out", "output directory"},
    };
    for (const auto& [key, help] : flags) app->add_option("--" + key, values[key], help);
  }

  AdaptConfig build() const {
    AdaptConfig cfg = config_file.empty() ? AdaptConfig{} : load_config(config_file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : values)
      if (!value.empty()) set_config_value(cfg, key, value);
    cfg.validate();
    return cfg;
  }
};

void print_rows(const StudyRecord& r) { std::cout << study_csv(r); }

int run_solve(const AdaptConfig& cfg, const std::string& mesh_file) {
  const TestCase tc = make_case(cfg.case_name, cfg.params);
  const Triangulation mesh = mesh_file.empty() ? initial_mesh(tc, cfg.n0) : read_mesh(mesh_file);
  if (!cfg.out.empty()) fs::create_directories(cfg.out);
  StudyRecord r;
  r.rows.push_back(solve_once(cfg, tc, mesh));
  if (!cfg.out.empty()) write_study_csv(cfg.out / "study.csv", r);
  print_rows(r);
  return 0;
}

int run_adapt(const AdaptConfig& cfg) {
  const StudyRecord r = adapt_loop(cfg);
  print_rows(r);
  if (!r.condition_method.empty()) std::cerr << "condition estimator: " << r.condition_method << '\n';
  return 0;
}

int run_study(AdaptConfig cfg, const std::vector<int>& orders, int window) {
  const fs::path base = cfg.out;
  std::ostringstream summary;
  summary << "p,ndof_last,L2_u_slope,L2_sigma_slope,energy_slope,J_error_slope,DWR_slope\n";
  for (int p : orders) {
    cfg.space.order = p;
    if (!base.empty()) cfg.out = base / ("p" + std::to_string(p));
    const StudyRecord r = adapt_loop(cfg);
    std::vector<int> ndof;
    for (const auto& row : r.rows) ndof.push_back(row.ndof);
    summary << p << ',' << ndof.back();
    for (const char* col : {"L2_u", "L2_sigma", "energy", "J_error", "DWR"}) {
      summary << ',';
      try {
        summary << rate_fit(ndof, column(r, col), window).slope;
      } catch (const std::invalid_argument&) {
        // column not computed for this case
      }
    }
    summary << '\n';
  }
  std::cout << summary.str();
  if (!base.empty()) {
    std::ofstream(base / "rates.csv") << summary.str();
  }
  return 0;
}

int run_remesh(const AdaptConfig& cfg, const std::string& mesh_file, double complexity) {
  const TestCase tc = make_case(cfg.case_name, cfg.params);
  const Triangulation mesh = mesh_file.empty() ? initial_mesh(tc, cfg.n0) : read_mesh(mesh_file);
  const fs::path out = cfg.out.empty() ? fs::path(".") : cfg.out;
  fs::create_directories(out);
  const AdaptPlan plan = plan_next(cfg, tc, mesh, complexity > 0.0 ? complexity : cfg.n0);
  const MetricField field = vertex_metric_from_elements(mesh, plan.metrics);
  write_metric(field, out / "metric.sol");
  const Triangulation next = next_mesh(cfg, mesh, plan, 0);
  write_mesh(next, out / "remeshed.mesh");
  std::cout << "elements " << mesh.num_triangles() << " -> " << next.num_triangles() << " (target "
            << std::lround(plan.complexity / kUnitAlpha) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DPG solver with anisotropic metric-based adaptation"};
  app.require_subcommand(1);

  CommonFlags solve_flags, adapt_flags, study_flags, remesh_flags;
  std::string solve_mesh, remesh_mesh;
  std::string orders_text = "1,2,3";
  int window = 5;
  double complexity = 0.0;

  auto* solve = app.add_subcommand("solve", "solve on one mesh and print the error record");
  solve_flags.attach(solve);
  solve->add_option("--mesh", solve_mesh, "MEDIT mesh to solve on (default: initial mesh of the case)");

  auto* adapt = app.add_subcommand("adapt", "run the adaptation loop");
  adapt_flags.attach(adapt);

  auto* study = app.add_subcommand("study", "adaptation loop for several trial degrees");
  study_flags.attach(study);
  study->add_option("--orders", orders_text, "comma-separated trial degrees");
  study->add_option("--window", window, "cycles used by the rate fits");

  auto* rm = app.add_subcommand("remesh", "solve once, build the sizing plan and remesh");
  remesh_flags.attach(rm);
  rm->add_option("--mesh", remesh_mesh, "MEDIT input mesh (default: initial mesh of the case)");
  rm->add_option("--complexity", complexity, "target complexity (default: n0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return run_solve(solve_flags.build(), solve_mesh);
    if (adapt->parsed()) return run_adapt(adapt_flags.build());
    if (study->parsed()) {
      std::vector<int> orders;
      std::stringstream ss(orders_text);
      for (std::string tok; std::getline(ss, tok, ',');) {
        try {
          orders.push_back(std::stoi(tok));
        } catch (const std::exception&) {
          throw ConfigError("--orders: bad entry '" + tok + "'");
        }
      }
      return run_study(study_flags.build(), orders, window);
    }
    if (rm->parsed()) return run_remesh(remesh_flags.build(), remesh_mesh, complexity);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
