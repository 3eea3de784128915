#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dpg/anisotropy.hpp"
#include "dpg/assembly.hpp"
#include "dpg/cases.hpp"
#include "dpg/continuous_model.hpp"
#include "dpg/remesh.hpp"
#include "dpg/solver.hpp"

namespace dpg {

/// Invalid run configuration (maps to exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class AdaptMode { solution, goal };

struct AdaptConfig {
  std::string case_name = "boundary_layer";
  CaseParameters params;
  SpaceSpec space;
  int cycles = 15;       // adaptation steps; cycles + 1 solves are recorded
  double n0 = 32.0;      // initial complexity
  double growth = 1.3;   // complexity factor per cycle
  AdaptMode mode = AdaptMode::solution;
  bool regularize = true;
  bool anisotropic = true;
  bool estimate_condition = false;
  SolveOptions solver;
  RemeshBackend remesher = RemeshBackend::builtin;
  std::string external_command;  // invoked as `<command> <exchange dir>`
  AnisotropyOptions anisotropy;
  SizingOptions sizing;
  RemeshConfig remesh;
  std::filesystem::path out;     // per-cycle dumps go here when non-empty

  void validate() const;
};

struct CycleRecord {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  int cycle = 0;
  int elements = 0;
  int ndof = 0;
  double l2_u = nan;
  double l2_sigma = nan;
  double energy = nan;
  double predicted = nan;      // E* at the current mesh complexity
  double target_error = nan;   // |J(u) - J(u_h)|
  double dwr = nan;
  double h_min = nan;
  double condition = nan;
};

struct StudyRecord {
  std::vector<CycleRecord> rows;
  std::string condition_method;
};

/// The uniform refinement of the case mesh whose element count is nearest to n0.
Triangulation initial_mesh(const TestCase& tc, double n0);

/// Solve, estimate, size, remesh, repeated `cycles` times. Solver failures
/// rethrow SolverError and remesher failures RemeshError, both prefixed with
/// the cycle index.
StudyRecord adapt_loop(const AdaptConfig& config);

/// Single solve on `mesh`, recorded as cycle 0.
CycleRecord solve_once(const AdaptConfig& config, const TestCase& tc, const Triangulation& mesh);

/// Builds the sizing plan for the next mesh from a solve on `mesh`.
AdaptPlan plan_next(const AdaptConfig& config, const TestCase& tc, const Triangulation& mesh, double complexity);

/// Realizes `plan` with the configured remesher, including the element-count correction.
Triangulation next_mesh(const AdaptConfig& config, const Triangulation& mesh, const AdaptPlan& plan, int cycle);

struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
};

/// Least-squares slope of log(values) against log(sqrt(ndof)) over the last
/// `window` entries. Throws std::invalid_argument on non-positive values.
RateFit rate_fit(const std::vector<int>& ndof, const std::vector<double>& values, int window);

/// Column accessor by CSV name (see study_columns()).
std::vector<double> column(const StudyRecord& record, const std::string& name);

/// Slope of log sqrt|K| against log r, r the centroid distance to `singularity`.
RateFit grading_fit(const Triangulation& mesh, const Point& singularity);

/// Process exit code for an exception escaping the pipeline.
int exit_code_for(const std::exception& e);

}  // namespace dpg
