#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dpg/assembly.hpp"

namespace dpg {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class SolverMethod { normal, dls };

/// A = sum B_K^T G_K^{-1} B_K and b = sum B_K^T G_K^{-1} l_K.
struct GlobalSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
};

/// Throws SolverError naming the element whose Gram matrix is not SPD.
GlobalSystem assemble_normal(const std::vector<LocalSystem>& locals, int num_dofs);

/// Whitened least-squares system: rows R_K^{-T} B_K stacked element by element.
struct LeastSquaresSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
};
LeastSquaresSystem assemble_least_squares(const std::vector<LocalSystem>& locals, int num_dofs);

struct SolveOptions {
  SolverMethod method = SolverMethod::normal;
  /// Eliminate the element-interior unknowns and solve for the skeleton only
  /// (normal equations only).
  bool static_condensation = false;
};

/// Factored primal operator. The same factorization serves the primal and any
/// number of dual right-hand sides.
class DpgSolver {
 public:
  DpgSolver(const std::vector<LocalSystem>& locals, const DofLayout& layout, SolveOptions options = {});
  ~DpgSolver();
  DpgSolver(DpgSolver&&) noexcept;
  DpgSolver& operator=(DpgSolver&&) noexcept;

  /// Trial coefficients of the primal solution.
  Eigen::VectorXd solve_primal();
  /// Solves A x = rhs with the normal-equation matrix.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs);

  const GlobalSystem& system() const { return system_; }
  SolverMethod method() const { return options_.method; }

 private:
  struct Impl;
  const std::vector<LocalSystem>* locals_;
  int num_dofs_;
  int num_interior_;
  SolveOptions options_;
  GlobalSystem system_;
  std::unique_ptr<Impl> impl_;

  void factor_normal();
};

/// Convenience wrapper.
Eigen::VectorXd solve_primal(const std::vector<LocalSystem>& locals, const DofLayout& layout,
                             SolveOptions options = {});

/// Element residual coefficients and their Riesz representative.
struct ErrorRepresentation {
  std::vector<Eigen::VectorXd> coeffs;  // y_K = G_K^{-1}(B_K x - l_K), test order [tau_x, tau_y, v]
  std::vector<double> eta;              // sqrt(y_K^T G_K y_K)
  double energy() const;                // sqrt(sum eta^2)
};

ErrorRepresentation error_representation(const std::vector<LocalSystem>& locals, const Eigen::VectorXd& x);

/// Restriction of a global trial vector to the local unknowns of one element.
Eigen::VectorXd gather(const LocalSystem& sys, const Eigen::VectorXd& x);

struct ConditionEstimate {
  double value;
  double lambda_max;
  double lambda_min;
  std::string method;  // human-readable estimator description
};

/// Extreme eigenvalues of an SPD matrix: 50 power iterations for the largest,
/// 50 inverse iterations (sparse LDLT) for the smallest.
ConditionEstimate condition_estimate(const SparseMatrix& spd, int iterations = 50);

/// Two-norm condition of the least-squares matrix: since Ahat^T Ahat equals the
/// normal-equation matrix, its singular values are the square roots of A's eigenvalues.
ConditionEstimate condition_estimate_dls(const SparseMatrix& normal_matrix, int iterations = 50);

/// Element-wise field values of a trial vector.
struct FieldEvaluator {
  FieldEvaluator(const Triangulation& mesh, const SpaceSpec& space, const DofLayout& layout, const Eigen::VectorXd& x);

  /// u_h and sigma_h at points (2 x n) inside triangle t.
  Eigen::VectorXd u(int t, const Eigen::MatrixXd& points) const;
  Eigen::MatrixXd sigma(int t, const Eigen::MatrixXd& points) const;  // 2 x n
  /// u_h coefficients in the element's trial basis.
  Eigen::VectorXd u_coeffs(int t) const;
  double u_at_centroid(int t) const;

  const ElementBasis& basis(int t) const { return bases_[t]; }

 private:
  const Triangulation* mesh_;
  SpaceSpec space_;
  const DofLayout* layout_;
  const Eigen::VectorXd* x_;
  std::vector<ElementBasis> bases_;
};

using VectorFunction = std::function<Point(const Point&)>;

/// ||u - u_h||_{L2} with quadrature of degree `quad_degree` per element.
double l2_error_u(const Triangulation& mesh, const FieldEvaluator& f, const ScalarFunction& exact, int quad_degree);
double l2_error_sigma(const Triangulation& mesh, const FieldEvaluator& f, const VectorFunction& exact, int quad_degree);

/// Smallest edge length of the mesh.
double min_edge_length(const Triangulation& mesh);

}  // namespace dpg
