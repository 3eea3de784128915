#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dpg/mesh.hpp"

namespace dpg {

/// Nodes and weights of a quadrature rule. Nodes are stored column-wise.
struct QuadratureRule {
  Eigen::MatrixXd points;   // dim x n
  Eigen::VectorXd weights;  // n

  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Jacobi rule with weight (1-x)^alpha (1+x)^beta on [-1,1], via Golub-Welsch.
QuadratureRule gauss_jacobi(int n, double alpha = 0.0, double beta = 0.0);

/// Gauss-Legendre rule on [0,1] exact for polynomials of the given degree.
QuadratureRule line_rule(int degree);

/// Collapsed (Duffy) tensor rule on the reference triangle {(0,0),(1,0),(0,1)}
/// exact for total degree `degree`; weights sum to 1/2. Supports degree <= 40.
QuadratureRule reference_triangle_rule(int degree);

/// Reference rule mapped onto a physical triangle; weights sum to its area.
QuadratureRule triangle_rule(const std::array<Point, 3>& corners, int degree);

/// Reference line rule mapped onto segment [a, b]; weights sum to |b - a|.
/// The 1D reference coordinates in [0,1] are kept in `params`.
struct EdgeRule {
  Eigen::MatrixXd points;   // 2 x n
  Eigen::VectorXd params;   // arclength fraction from a
  Eigen::VectorXd weights;
  int size() const { return static_cast<int>(weights.size()); }
};
EdgeRule edge_rule(const Point& a, const Point& b, int degree);

}  // namespace dpg

namespace dpg {

/// Adaptive Gauss-Legendre integration on [a, b]: bisects until a 10-point
/// and a 20-point rule agree to `tol` (absolute, scaled by interval fraction).
double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                          int max_depth = 40);

/// Iterated adaptive integration over the rectangle [x0,x1] x [y0,y1].
double adaptive_integrate_2d(const std::function<double(double, double)>& f, double x0, double x1, double y0,
                             double y1, double tol = 1e-12);

}  // namespace dpg
