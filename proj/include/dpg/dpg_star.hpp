#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "dpg/assembly.hpp"
#include "dpg/solver.hpp"

namespace dpg {

/// Linear target J(u, sigma) = (j_omega, u) or sum over tagged boundary edges
/// of weight * (sigma . n outward), carried by the normal-flux trace.
struct TargetFunctional {
  enum class Kind { volume_weighted, boundary_flux };

  Kind kind = Kind::volume_weighted;
  ScalarFunction j_omega;
  std::map<int, double> flux_weights;  // boundary tag -> weight

  static TargetFunctional volume(ScalarFunction j);
  static TargetFunctional flux(std::map<int, double> weights);

  void validate() const;
  /// Boundary trace of the dual field v on an edge with this tag.
  double dual_boundary_value(int tag) const;
};

/// J applied to every trial basis function, so that J(U_h) = J . x.
Eigen::VectorXd target_vector(const Triangulation& mesh, const DofLayout& layout, const SpaceSpec& space,
                              const TargetFunctional& target);

struct DualSolution {
  Eigen::VectorXd xi;
  std::vector<Eigen::VectorXd> z;  // G_K^{-1} B_K xi, test order [tau_x, tau_y, v]
};

DualSolution solve_dual(DpgSolver& solver, const std::vector<LocalSystem>& locals, const Eigen::VectorXd& target);

/// Test-space bases of every element (degree p + dp).
std::vector<ElementBasis> test_bases(const Triangulation& mesh, const SpaceSpec& space);

/// Values of a test-space coefficient vector at points: rows tau_x, tau_y, v.
Eigen::MatrixXd eval_test_field(const ElementBasis& basis, const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& points);

/// Explicit dual indicator per element:
///   ||tau/eps + grad v||^2 + ||div tau - beta.grad v - j||^2
///   + sum_{interior e} h_e ||[tau.n]||^2 + sum_e h_e^{-1} ||[v]||^2,
/// edge terms taken over all edges of the element; on boundary edges the jump
/// is v minus the dual boundary data. Returns the square roots.
std::vector<double> eta_star(const Triangulation& mesh, const std::vector<ElementBasis>& bases,
                             const SpaceSpec& space, const ProblemSpec& problem,
                             const std::vector<Eigen::VectorXd>& z, const TargetFunctional& target);

/// Least-squares fit of a degree p+dp field to z on each element's edge patch,
/// returned as coefficients in that element's test basis. Falls back to the
/// vertex patch when the edge patch does not determine the fit.
std::vector<Eigen::VectorXd> patch_reconstruct(const Triangulation& mesh, const std::vector<ElementBasis>& bases,
                                               const SpaceSpec& space, const std::vector<Eigen::VectorXd>& z);

/// |sum_K (B_K x - l_K) . z_K|
double dwr_estimate(const std::vector<LocalSystem>& locals, const Eigen::VectorXd& x,
                    const std::vector<Eigen::VectorXd>& z);

/// eta_star * eta, elementwise.
std::vector<double> goal_indicator(const std::vector<double>& eta, const std::vector<double>& eta_star);

}  // namespace dpg
