#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dpg/assembly.hpp"
#include "dpg/dpg_star.hpp"
#include "dpg/solver.hpp"

namespace dpg {

/// Tunable constants of the test cases. NaN epsilon selects each case's default.
struct CaseParameters {
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double gauss_alpha = 1000.0;   // steepness of the Gaussian weight
  double gauss_xc = 0.99, gauss_yc = 0.5;
  double atan_alpha = 50.0;
  double atan_x1 = 1.0 / 3.0, atan_x2 = 2.0 / 3.0;
  double ils_gamma = 2.0;
  double ils_theta = 0.5;        // slope of the singular line x = theta*y + 0.5
  double sine_k = 2.0;           // u = sin(k pi x) sin(k pi y)
  int poly_degree = 2;
};

struct TestCase {
  std::string name;
  Triangulation initial_mesh;
  ProblemSpec problem;
  ScalarFunction exact_u;
  VectorFunction exact_sigma;
  std::optional<TargetFunctional> target;
  double exact_target = std::numeric_limits<double>::quiet_NaN();
  std::optional<Point> singularity;
};

/// Names accepted by make_case.
std::vector<std::string> case_names();

/// Throws std::invalid_argument for unknown names.
///   boundary_layer     convection-diffusion with layers at x = 1 and y = 1
///   reverse_layer      same primal, volume target whose dual has layers at x = 0, y = 0
///   gaussian_peak      same primal, Gaussian-weighted volume target
///   arctan_flux        arctangent hump, flux target on the right side (tag 2)
///   line_singularity   Poisson with a kink of order gamma along x = theta*y + 0.5
///   lshape             Poisson on the L-shaped domain, u = r^{2/3} sin(2 theta/3)
///   sine               Poisson, u = sin(k pi x) sin(k pi y)
///   polynomial         Poisson with a polynomial solution of degree poly_degree
TestCase make_case(const std::string& name, const CaseParameters& params = {});

}  // namespace dpg
