#include "dpg/polynomial.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpg {

Polynomial::Polynomial(int degree, Eigen::VectorXd coeffs) : degree_(degree), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != monomial_count(degree)) throw std::invalid_argument("Polynomial: coefficient count mismatch");
}

Polynomial Polynomial::constant(double c) {
  Polynomial p(0);
  p.coeffs_(0) = c;
  return p;
}

Polynomial Polynomial::linear(double c0, double cx, double cy) {
  Polynomial p(1);
  p.coeffs_ << c0, cx, cy;
  return p;
}

double Polynomial::coeff(int a, int b) const {
  if (a < 0 || b < 0 || a + b > degree_) return 0.0;
  return coeffs_(monomial_index(a, b));
}

double Polynomial::operator()(double x, double y) const {
  // Horner over each homogeneous block would be tidier; degrees here are small.
  double sum = 0.0;
  double xa = 1.0;
  for (int a = 0; a <= degree_; ++a) {
    double yb = 1.0;
    for (int b = 0; a + b <= degree_; ++b) {
      sum += coeffs_(monomial_index(a, b)) * xa * yb;
      yb *= y;
    }
    xa *= x;
  }
  return sum;
}

Polynomial Polynomial::derivative_x() const {
  Polynomial d(std::max(degree_ - 1, 0));
  for (int a = 1; a <= degree_; ++a)
    for (int b = 0; a + b <= degree_; ++b) d.set(a - 1, b, a * coeff(a, b));
  return d;
}

Polynomial Polynomial::derivative_y() const {
  Polynomial d(std::max(degree_ - 1, 0));
  for (int a = 0; a <= degree_; ++a)
    for (int b = 1; a + b <= degree_; ++b) d.set(a, b - 1, b * coeff(a, b));
  return d;
}

Polynomial Polynomial::homogeneous_part(int order) const {
  Polynomial h(degree_);
  if (order > degree_) return h;
  for (int b = 0; b <= order; ++b) h.set(order - b, b, coeff(order - b, b));
  return h;
}

Polynomial Polynomial::linear_substitution(const Eigen::Matrix2d& m) const {
  const Polynomial u = linear(0.0, m(0, 0), m(0, 1));
  const Polynomial v = linear(0.0, m(1, 0), m(1, 1));
  std::vector<Polynomial> upow{constant(1.0)}, vpow{constant(1.0)};
  for (int k = 1; k <= degree_; ++k) {
    upow.push_back(upow.back() * u);
    vpow.push_back(vpow.back() * v);
  }
  Polynomial out(degree_);
  for (int a = 0; a <= degree_; ++a)
    for (int b = 0; a + b <= degree_; ++b) {
      const double c = coeff(a, b);
      if (c != 0.0) out += c * (upow[a] * vpow[b]);
    }
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.degree_ > degree_) {
    Eigen::VectorXd grown = Eigen::VectorXd::Zero(monomial_count(other.degree_));
    grown.head(coeffs_.size()) = coeffs_;
    coeffs_ = std::move(grown);
    degree_ = other.degree_;
  }
  coeffs_.head(other.coeffs_.size()) += other.coeffs_;
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  Polynomial r(p.degree() + q.degree());
  for (int a = 0; a <= p.degree(); ++a)
    for (int b = 0; a + b <= p.degree(); ++b) {
      const double c = p.coeff(a, b);
      if (c == 0.0) continue;
      for (int e = 0; e <= q.degree(); ++e)
        for (int f = 0; e + f <= q.degree(); ++f) {
          r.coeffs_(monomial_index(a + e, b + f)) += c * q.coeff(e, f);
        }
    }
  return r;
}

Eigen::MatrixXd monomial_values(const Eigen::MatrixXd& local, int degree) {
  const Eigen::Index n = local.cols();
  Eigen::MatrixXd v(n, monomial_count(degree));
  for (Eigen::Index q = 0; q < n; ++q) {
    const double x = local(0, q), y = local(1, q);
    v(q, 0) = 1.0;
    for (int k = 1; k <= degree; ++k) {
      // Degree-k block from degree-(k-1) block: x * (previous) and one extra y^k.
      const int prev = monomial_index(k - 1, 0);
      const int cur = monomial_index(k, 0);
      for (int b = 0; b < k; ++b) v(q, cur + b) = x * v(q, prev + b);
      v(q, cur + k) = y * v(q, prev + k - 1);
    }
  }
  return v;
}

void monomial_gradients(const Eigen::MatrixXd& local, int degree, Eigen::MatrixXd& dx, Eigen::MatrixXd& dy) {
  const Eigen::MatrixXd v = monomial_values(local, std::max(degree - 1, 0));
  const Eigen::Index n = local.cols();
  dx = Eigen::MatrixXd::Zero(n, monomial_count(degree));
  dy = Eigen::MatrixXd::Zero(n, monomial_count(degree));
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b) {
      const int m = monomial_index(a, b);
      if (a > 0) dx.col(m) = a * v.col(monomial_index(a - 1, b));
      if (b > 0) dy.col(m) = b * v.col(monomial_index(a, b - 1));
    }
}

}  // namespace dpg
