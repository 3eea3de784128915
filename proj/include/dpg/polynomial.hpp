#pragma once

#include <Eigen/Dense>

namespace dpg {

/// Number of monomials x^a y^b with a + b <= degree.
constexpr int monomial_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Graded index of x^a y^b: degree blocks in increasing order, y-power ascending.
constexpr int monomial_index(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }

/// Bivariate polynomial sum c_ab x^a y^b in a local coordinate frame.
class Polynomial {
 public:
  Polynomial() : Polynomial(0) {}
  explicit Polynomial(int degree) : degree_(degree), coeffs_(Eigen::VectorXd::Zero(monomial_count(degree))) {}
  Polynomial(int degree, Eigen::VectorXd coeffs);

  static Polynomial constant(double c);
  /// c0 + cx x + cy y
  static Polynomial linear(double c0, double cx, double cy);

  int degree() const { return degree_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  double coeff(int a, int b) const;
  void set(int a, int b, double value) { coeffs_(monomial_index(a, b)) = value; }

  double operator()(double x, double y) const;

  Polynomial derivative_x() const;
  Polynomial derivative_y() const;

  /// Composition p(a11 X + a12 Y, a21 X + a22 Y).
  Polynomial linear_substitution(const Eigen::Matrix2d& a) const;
  /// Sum of the terms of total degree exactly `order`.
  Polynomial homogeneous_part(int order) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  int degree_;
  Eigen::VectorXd coeffs_;
};

/// Rows: points; columns: monomials up to `degree` at the given local coordinates (2 x n).
Eigen::MatrixXd monomial_values(const Eigen::MatrixXd& local, int degree);
/// d/dx and d/dy of every monomial at the given local coordinates.
void monomial_gradients(const Eigen::MatrixXd& local, int degree, Eigen::MatrixXd& dx, Eigen::MatrixXd& dy);

}  // namespace dpg
