#include "dpg/basis.hpp"

#include <cmath>

#include "dpg/quadrature.hpp"

namespace dpg {

ElementBasis::ElementBasis(const std::array<Point, 3>& c, int degree) : degree_(degree) {
  center_ = (c[0] + c[1] + c[2]) / 3.0;
  Eigen::Matrix2d jac;
  jac.col(0) = c[1] - c[0];
  jac.col(1) = c[2] - c[0];
  area_ = 0.5 * std::abs(jac.determinant());
  jinv_ = jac.inverse();

  const QuadratureRule rule = triangle_rule(c, 2 * degree);
  const Eigen::MatrixXd mono = monomial_values(local_coords(rule.points), degree);
  const Eigen::VectorXd sqrt_w = rule.weights.cwiseSqrt();
  const int n = monomial_count(degree);

  Eigen::MatrixXd q = sqrt_w.asDiagonal() * mono;  // columns orthonormalized in place
  coeffs_ = Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        const double r = q.col(i).dot(q.col(j));
        q.col(j) -= r * q.col(i);
        coeffs_.col(j) -= r * coeffs_.col(i);
      }
    }
    const double norm = q.col(j).norm();
    q.col(j) /= norm;
    coeffs_.col(j) /= norm;
  }
}

Eigen::MatrixXd ElementBasis::local_coords(const Eigen::MatrixXd& points) const {
  return jinv_ * (points.colwise() - center_);
}

Eigen::MatrixXd ElementBasis::values(const Eigen::MatrixXd& points) const {
  return monomial_values(local_coords(points), degree_) * coeffs_;
}

void ElementBasis::gradients(const Eigen::MatrixXd& points, Eigen::MatrixXd& dx, Eigen::MatrixXd& dy) const {
  Eigen::MatrixXd dxi, deta;
  monomial_gradients(local_coords(points), degree_, dxi, deta);
  dxi = dxi * coeffs_;
  deta = deta * coeffs_;
  // grad_x = J^{-T} grad_xi
  dx = jinv_(0, 0) * dxi + jinv_(1, 0) * deta;
  dy = jinv_(0, 1) * dxi + jinv_(1, 1) * deta;
}

Polynomial ElementBasis::physical_polynomial(const Eigen::VectorXd& c) const {
  const Polynomial local(degree_, coeffs_.leftCols(c.size()) * c);
  return local.linear_substitution(jinv_);
}

Eigen::MatrixXd edge_basis_values(const Eigen::VectorXd& t, int degree, double length) {
  Eigen::MatrixXd v(t.size(), degree + 1);
  for (Eigen::Index q = 0; q < t.size(); ++q) {
    const double s = 2.0 * t(q) - 1.0;
    double p_prev = 1.0, p = s;
    v(q, 0) = 1.0;
    if (degree >= 1) v(q, 1) = s;
    for (int k = 2; k <= degree; ++k) {
      const double p_next = ((2.0 * k - 1.0) * s * p - (k - 1.0) * p_prev) / k;
      p_prev = p;
      p = p_next;
      v(q, k) = p;
    }
  }
  for (int k = 0; k <= degree; ++k) v.col(k) *= std::sqrt((2.0 * k + 1.0) / length);
  return v;
}

}  // namespace dpg
