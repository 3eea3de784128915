#include "dpg/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "dpg/dpg_star.hpp"
#include "dpg/report.hpp"

namespace dpg {

void AdaptConfig::validate() const {
  try {
    space.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto names = case_names();
  if (std::find(names.begin(), names.end(), case_name) == names.end()) throw ConfigError("unknown case " + case_name);
  if (cycles < 0) throw ConfigError("cycles must be non-negative");
  if (!(n0 > 0.0)) throw ConfigError("n0 must be positive");
  if (!(growth >= 1.0)) throw ConfigError("growth must be >= 1");
  if (remesher == RemeshBackend::external && external_command.empty())
    throw ConfigError("external remesher selected but no command given");
  try {
    remesh.validate();
  } catch (const RemeshError& e) {
    throw ConfigError(e.what());
  }
}

Triangulation initial_mesh(const TestCase& tc, double n0) {
  Triangulation mesh = tc.initial_mesh;
  // Refine while four times the count is at least as close to n0.
  while (std::abs(std::log(4.0 * mesh.num_triangles() / n0)) <= std::abs(std::log(mesh.num_triangles() / n0)))
    mesh = refine_uniform(mesh);
  return mesh;
}

namespace {

std::string cycle_prefix(int cycle) { return "cycle " + std::to_string(cycle) + ": "; }

struct CycleResult {
  CycleRecord record;
  std::vector<double> eta;
  std::optional<AdaptPlan> plan;
  std::string condition_method;
};

// One solve on `mesh`, its record and, when `next_complexity > 0`, the plan
// for the next mesh. Dumps go to `dump` when it is non-empty.
CycleResult run_cycle(const AdaptConfig& cfg, const TestCase& tc, const Triangulation& mesh, int cycle,
                      double next_complexity, const std::filesystem::path& dump) {
  CycleResult res;
  auto& rec = res.record;
  const SpaceSpec& space = cfg.space;
  const int p = space.order;
  rec.cycle = cycle;
  rec.elements = mesh.num_triangles();
  rec.h_min = min_edge_length(mesh);

  const DofLayout layout(mesh, space);
  rec.ndof = layout.num_dofs();
  std::vector<LocalSystem> locals;
  std::optional<DpgSolver> solver;
  Eigen::VectorXd x;
  try {
    locals = build_local_systems(mesh, layout, tc.problem, space);
    solver.emplace(locals, layout, cfg.solver);
    x = solver->solve_primal();
  } catch (const std::exception& e) {
    throw SolverError(cycle_prefix(cycle) + e.what());
  }
  if (!x.allFinite()) throw SolverError(cycle_prefix(cycle) + "non-finite solution");

  const ErrorRepresentation rep = error_representation(locals, x);
  res.eta = rep.eta;
  rec.energy = rep.energy();
  // Complexity of the current mesh: every element counts as one unit triangle.
  const double current_complexity = kUnitAlpha * mesh.num_triangles();
  rec.predicted = predicted_error(rep.eta, current_complexity, p);

  const FieldEvaluator fields(mesh, space, layout, x);
  const int qd = 2 * space.test_order() + 2;
  if (tc.exact_u) rec.l2_u = l2_error_u(mesh, fields, tc.exact_u, qd);
  if (tc.exact_sigma) rec.l2_sigma = l2_error_sigma(mesh, fields, tc.exact_sigma, qd);

  std::vector<double> size_indicator = rep.eta;
  if (tc.target) {
    const Eigen::VectorXd jv = target_vector(mesh, layout, space, *tc.target);
    if (std::isfinite(tc.exact_target)) rec.target_error = std::abs(tc.exact_target - jv.dot(x));
    DualSolution dual;
    try {
      dual = solve_dual(*solver, locals, jv);
    } catch (const std::exception& e) {
      throw SolverError(cycle_prefix(cycle) + e.what());
    }
    const auto bases = test_bases(mesh, space);
    rec.dwr = dwr_estimate(locals, x, patch_reconstruct(mesh, bases, space, dual.z));
    if (cfg.mode == AdaptMode::goal) {
      size_indicator = goal_indicator(rep.eta, eta_star(mesh, bases, space, tc.problem, dual.z, *tc.target));
    }
  } else if (cfg.mode == AdaptMode::goal) {
    throw ConfigError("case " + tc.name + " has no target functional for goal mode");
  }

  if (cfg.estimate_condition) {
    const auto est = cfg.solver.method == SolverMethod::dls ? condition_estimate_dls(solver->system().A)
                                                            : condition_estimate(solver->system().A);
    rec.condition = est.value;
    res.condition_method = est.method;
  }

  CellFields cells;
  cells.eta = rep.eta;
  if (next_complexity > 0.0) {
    const int nt = mesh.num_triangles();
    std::vector<double> areas(nt);
    for (int t = 0; t < nt; ++t) areas[t] = mesh.area(t);
    if (cfg.regularize) size_indicator = regularize(size_indicator, next_complexity, p, cfg.sizing);
    const auto density =
        clamp_density(optimal_density(size_indicator, areas, next_complexity, p), areas, next_complexity, cfg.sizing);

    std::vector<AnisotropyResult> aniso(nt);
    if (cfg.anisotropic) {
      for (int t = 0; t < nt; ++t) {
        const auto c = mesh.corners(t);
        const ElementBasis basis(c, space.test_order());
        const auto comps = decompose_homogeneous(error_density_poly(basis, rep.coeffs[t], space.norm), cfg.anisotropy);
        const double lambda = 1.0 / element_area_density(c[0], c[1], c[2]).density;
        aniso[t] = anisotropy_minimize(comps, lambda, cfg.anisotropy);
      }
    }
    res.plan = build_plan(density, areas, aniso, predicted_error(rep.eta, next_complexity, p));
    cells.density = res.plan->density;
    cells.beta.reserve(nt);
    for (const auto& a : aniso) cells.beta.push_back(a.beta);
    if (!dump.empty()) write_plan_csv(dump / ("plan_" + std::to_string(cycle) + ".csv"), *res.plan, rep.eta, areas, p);
  }
  if (!dump.empty()) {
    write_vtk(dump / ("cycle_" + std::to_string(cycle) + ".vtk"), mesh, &fields, cells);
    write_mesh(mesh, dump / ("mesh_" + std::to_string(cycle) + ".mesh"));
  }
  return res;
}

RateFit line_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("line fit: abscissae do not vary");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace

Triangulation next_mesh(const AdaptConfig& cfg, const Triangulation& mesh, const AdaptPlan& plan, int cycle) {
  try {
    const MetricField field = vertex_metric_from_elements(mesh, plan.metrics);
    if (cfg.remesher == RemeshBackend::builtin) {
      // Band hysteresis biases the element count; rescale the metric until the
      // count matches complexity / alpha.
      const double target = plan.complexity / kUnitAlpha;
      Triangulation out = remesh(mesh, field, cfg.remesh);
      double scale = 1.0;
      for (int k = 0; k < cfg.remesh.count_corrections; ++k) {
        const double ratio = target / out.num_triangles();
        if (std::abs(ratio - 1.0) <= cfg.remesh.count_tolerance) break;
        scale *= ratio;
        std::vector<Metric> scaled = field.vertex_metrics();
        for (auto& m : scaled) m = Metric{scale * m.m11, scale * m.m12, scale * m.m22};
        out = remesh(mesh, MetricField(mesh, scaled), cfg.remesh);
      }
      return out;
    }
    const auto dir = (cfg.out.empty() ? std::filesystem::temp_directory_path() / "dpgadapt_remesh" : cfg.out) /
                     ("exchange_" + std::to_string(cycle));
    export_external(mesh, field, dir);
    std::filesystem::remove(dir / "output.mesh");
    const std::string cmd = cfg.external_command + " '" + dir.string() + "'";
    if (std::system(cmd.c_str()) != 0) throw RemeshError("external command failed: " + cmd);
    if (!std::filesystem::exists(dir / "output.mesh")) throw RemeshError("external command wrote no output.mesh");
    return import_external(dir);
  } catch (const RemeshError& e) {
    throw RemeshError(cycle_prefix(cycle) + e.what());
  } catch (const MetricError& e) {
    throw RemeshError(cycle_prefix(cycle) + e.what());
  } catch (const MeshError& e) {
    throw RemeshError(cycle_prefix(cycle) + e.what());
  }
}

CycleRecord solve_once(const AdaptConfig& config, const TestCase& tc, const Triangulation& mesh) {
  return run_cycle(config, tc, mesh, 0, 0.0, config.out).record;
}

AdaptPlan plan_next(const AdaptConfig& config, const TestCase& tc, const Triangulation& mesh, double complexity) {
  return *run_cycle(config, tc, mesh, 0, complexity, config.out).plan;
}

StudyRecord adapt_loop(const AdaptConfig& config) {
  config.validate();
  TestCase tc;
  try {
    tc = make_case(config.case_name, config.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (config.mode == AdaptMode::goal && !tc.target)
    throw ConfigError("case " + tc.name + " has no target functional for goal mode");
  if (!config.out.empty()) std::filesystem::create_directories(config.out);

  StudyRecord study;
  Triangulation mesh = initial_mesh(tc, config.n0);
  double complexity = config.n0;
  for (int cycle = 0; cycle <= config.cycles; ++cycle) {
    const bool last = cycle == config.cycles;
    complexity *= config.growth;
    auto res = run_cycle(config, tc, mesh, cycle, last ? 0.0 : complexity, config.out);
    study.rows.push_back(res.record);
    if (!res.condition_method.empty()) study.condition_method = res.condition_method;
    if (!config.out.empty()) write_study_csv(config.out / "study.csv", study);
    if (!last) mesh = next_mesh(config, mesh, *res.plan, cycle);
  }
  return study;
}

RateFit rate_fit(const std::vector<int>& ndof, const std::vector<double>& values, int window) {
  if (ndof.size() != values.size()) throw std::invalid_argument("rate_fit: length mismatch");
  if (window < 2 || static_cast<int>(values.size()) < window) throw std::invalid_argument("rate_fit: too few cycles");
  const std::size_t first = values.size() - window;
  std::vector<double> xs, ys;
  for (std::size_t k = first; k < values.size(); ++k) {
    if (!(values[k] > 0.0) || ndof[k] <= 0) throw std::invalid_argument("rate_fit: non-positive value");
    xs.push_back(0.5 * std::log(static_cast<double>(ndof[k])));
    ys.push_back(std::log(values[k]));
  }
  return line_fit(xs, ys);
}

std::vector<double> column(const StudyRecord& record, const std::string& name) {
  std::vector<double> out;
  for (const auto& r : record.rows) {
    if (name == "cycle") out.push_back(r.cycle);
    else if (name == "N_e") out.push_back(r.elements);
    else if (name == "ndof") out.push_back(r.ndof);
    else if (name == "L2_u") out.push_back(r.l2_u);
    else if (name == "L2_sigma") out.push_back(r.l2_sigma);
    else if (name == "energy") out.push_back(r.energy);
    else if (name == "E_star") out.push_back(r.predicted);
    else if (name == "J_error") out.push_back(r.target_error);
    else if (name == "DWR") out.push_back(r.dwr);
    else if (name == "h_min") out.push_back(r.h_min);
    else if (name == "cond") out.push_back(r.condition);
    else throw std::invalid_argument("unknown column " + name);
  }
  return out;
}

RateFit grading_fit(const Triangulation& mesh, const Point& singularity) {
  std::vector<double> xs, ys;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double r = (mesh.centroid(t) - singularity).norm();
    if (r <= 1e-8) continue;
    xs.push_back(std::log(r));
    ys.push_back(0.5 * std::log(mesh.area(t)));
  }
  if (xs.size() < 3) throw std::invalid_argument("grading_fit: too few elements");
  return line_fit(xs, ys);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const RemeshError*>(&e)) return 4;
  if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const AssemblyError*>(&e)) return 3;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
  return 1;
}

}  // namespace dpg
