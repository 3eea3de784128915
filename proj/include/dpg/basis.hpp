#pragma once

#include <array>

#include <Eigen/Dense>

#include "dpg/mesh.hpp"
#include "dpg/polynomial.hpp"

namespace dpg {

/// L2(K)-orthonormal basis of P^degree(K).
///
/// Built by modified Gram-Schmidt (two passes) on monomials in the centered
/// affine coordinates xi = J^{-1}(x - centroid), J = [c1 - c0, c2 - c0], so the
/// conditioning does not depend on the element shape. The ordering is graded,
/// hence the first monomial_count(p) functions span P^p for every p <= degree.
class ElementBasis {
 public:
  ElementBasis(const std::array<Point, 3>& corners, int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(coeffs_.cols()); }
  const Point& center() const { return center_; }
  double area() const { return area_; }
  /// Maps physical offsets from the centroid to local coordinates.
  const Eigen::Matrix2d& inverse_jacobian() const { return jinv_; }

  /// Local coordinates of physical points (2 x n).
  Eigen::MatrixXd local_coords(const Eigen::MatrixXd& points) const;
  /// Basis values, rows = points, cols = basis functions.
  Eigen::MatrixXd values(const Eigen::MatrixXd& points) const;
  /// Physical gradients of all basis functions at the points.
  void gradients(const Eigen::MatrixXd& points, Eigen::MatrixXd& dx, Eigen::MatrixXd& dy) const;

  /// Monomial-to-basis coefficient matrix in local coordinates.
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }

  /// sum_j c_j phi_j as a polynomial in physical offsets (x - xc, y - yc).
  Polynomial physical_polynomial(const Eigen::VectorXd& c) const;

 private:
  int degree_;
  Point center_;
  double area_;
  Eigen::Matrix2d jinv_;
  Eigen::MatrixXd coeffs_;
};

/// L2(e)-orthonormal Legendre polynomials sqrt((2k+1)/|e|) P_k(2t-1) for
/// k = 0..degree at arclength fractions t in [0,1]. Rows = points.
Eigen::MatrixXd edge_basis_values(const Eigen::VectorXd& t, int degree, double length);

}  // namespace dpg
