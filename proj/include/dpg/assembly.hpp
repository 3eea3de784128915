#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dpg/basis.hpp"
#include "dpg/mesh.hpp"

namespace dpg {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ScalarFunction = std::function<double(const Point&)>;

/// -eps lap(u) + div(beta u) = s in the domain, u = g on the boundary.
struct ProblemSpec {
  double epsilon = 1.0;
  Eigen::Vector2d beta = Eigen::Vector2d::Zero();
  ScalarFunction source = [](const Point&) { return 0.0; };
  ScalarFunction dirichlet = [](const Point&) { return 0.0; };
  bool pure_diffusion = true;

  /// Throws unless eps > 0 and the pure-diffusion flag matches beta.
  void validate() const;
};

enum class TestNorm { standard, scaled };

struct SpaceSpec {
  int order = 1;       // trial degree p
  int enrichment = 2;  // test degree is p + enrichment
  TestNorm norm = TestNorm::scaled;

  int test_order() const { return order + enrichment; }
  int trial_size() const { return monomial_count(order); }
  int test_size() const { return monomial_count(test_order()); }
  int trace_size() const { return order + 1; }
  void validate() const;
};

/// Global numbering of the trial unknowns.
///
/// Interior fields (sigma_x, sigma_y, u) come first, element-major. Trace
/// unknowns follow edge-major: lambda (interior edges only) then the normal
/// flux sigma-hat (every edge).
class DofLayout {
 public:
  DofLayout(const Triangulation& mesh, const SpaceSpec& space);

  int num_dofs() const { return num_dofs_; }
  int num_interior_dofs() const { return num_interior_; }
  int sigma_offset(int t, int component) const { return t * 3 * np_ + component * np_; }
  int u_offset(int t) const { return t * 3 * np_ + 2 * np_; }
  /// -1 on boundary edges.
  int lambda_offset(int e) const { return lambda_[e]; }
  int flux_offset(int e) const { return flux_[e]; }

  /// Global ids of the local trial unknowns of triangle t, in local order
  /// [sigma_x, sigma_y, u, then per local edge: lambda (interior only), flux].
  std::vector<int> element_dofs(const Triangulation& mesh, int t) const;

 private:
  int np_ = 0, ne_ = 0;
  int num_interior_ = 0, num_dofs_ = 0;
  std::vector<int> lambda_, flux_;
};

/// Local DPG system on one element. Test unknowns are ordered
/// [tau_x, tau_y, v], each of size SpaceSpec::test_size().
struct LocalSystem {
  Eigen::MatrixXd B;  // test x trial
  Eigen::MatrixXd G;  // test x test
  Eigen::VectorXd l;  // test
  std::vector<int> dofs;
};

/// Precomputed element data shared by the local operators.
struct ElementGeometry {
  int triangle;
  std::array<Point, 3> corners;
  ElementBasis basis;  // degree p + dp; leading trial_size() functions span P^p
};

ElementGeometry element_geometry(const Triangulation& mesh, int t, const SpaceSpec& space);

/// Gram matrix of the test inner product. `quad_degree` < 0 selects the default
/// 2(p+dp)+2; anything below 2(p+dp) is rejected.
Eigen::MatrixXd local_gram(const ElementGeometry& geo, const SpaceSpec& space, int quad_degree = -1);

struct StiffnessLoad {
  Eigen::MatrixXd B;
  Eigen::VectorXd l;
};

StiffnessLoad local_stiffness_load(const Triangulation& mesh, const ElementGeometry& geo, const ProblemSpec& problem,
                                   const SpaceSpec& space);

LocalSystem build_local_system(const Triangulation& mesh, const DofLayout& layout, int t, const ProblemSpec& problem,
                               const SpaceSpec& space);

std::vector<LocalSystem> build_local_systems(const Triangulation& mesh, const DofLayout& layout,
                                             const ProblemSpec& problem, const SpaceSpec& space);

/// Weight of the gradient and divergence terms of the test norm.
double test_norm_weight(TestNorm norm, double area);

/// Default quadrature degrees.
inline int volume_quad_degree(const SpaceSpec& s) { return 2 * s.test_order() + 2; }
inline int edge_quad_degree(const SpaceSpec& s) { return 2 * s.test_order() + 1; }

}  // namespace dpg
