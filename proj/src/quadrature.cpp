#include "dpg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace dpg {

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: need at least one node");
  // Jacobi matrix of the monic recurrence.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    const double denom = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
    jac(k, k) = denom == 0.0 ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / denom;
    if (k + 1 < n) {
      const double k1 = k + 1.0;
      const double num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab);
      const double den = (2.0 * k1 + ab) * (2.0 * k1 + ab) * (2.0 * k1 + ab + 1.0) * (2.0 * k1 + ab - 1.0);
      jac(k, k + 1) = jac(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                     std::tgamma(ab + 2.0);
  QuadratureRule rule;
  rule.points = es.eigenvalues().transpose();
  rule.weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

namespace {

std::mutex cache_mutex;

}  // namespace

QuadratureRule line_rule(int degree) {
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  const int n = std::max(1, (degree + 2) / 2);
  QuadratureRule gl = gauss_jacobi(n);
  QuadratureRule rule;
  rule.points = (0.5 * (gl.points.array() + 1.0)).matrix();
  rule.weights = 0.5 * gl.weights;
  cache.emplace(degree, rule);
  return rule;
}

QuadratureRule reference_triangle_rule(int degree) {
  if (degree < 0 || degree > 40) throw std::invalid_argument("triangle rule: unsupported degree");
  static std::map<int, QuadratureRule> cache;
  {
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(degree);
    if (it != cache.end()) return it->second;
  }
  // x = (1+a)/2 (1-b)/2, y = (1+b)/2 with a Gauss-Legendre, b Gauss-Jacobi(1,0)
  // absorbing the collapse Jacobian.
  const int n = std::max(1, (degree + 2) / 2);
  const QuadratureRule ga = gauss_jacobi(n);
  const QuadratureRule gb = gauss_jacobi(n, 1.0, 0.0);
  QuadratureRule rule;
  rule.points.resize(2, n * n);
  rule.weights.resize(n * n);
  int q = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i, ++q) {
      const double a = ga.points(0, i), b = gb.points(0, j);
      rule.points(0, q) = 0.25 * (1.0 + a) * (1.0 - b);
      rule.points(1, q) = 0.5 * (1.0 + b);
      rule.weights(q) = 0.125 * ga.weights(i) * gb.weights(j);
    }
  }
  std::lock_guard lock(cache_mutex);
  cache.emplace(degree, rule);
  return rule;
}

QuadratureRule triangle_rule(const std::array<Point, 3>& c, int degree) {
  QuadratureRule ref = reference_triangle_rule(degree);
  Eigen::Matrix2d jac;
  jac.col(0) = c[1] - c[0];
  jac.col(1) = c[2] - c[0];
  QuadratureRule rule;
  rule.points = (jac * ref.points).colwise() + c[0];
  rule.weights = std::abs(jac.determinant()) * ref.weights;
  return rule;
}

EdgeRule edge_rule(const Point& a, const Point& b, int degree) {
  const QuadratureRule ref = line_rule(degree);
  EdgeRule rule;
  rule.params = ref.points.row(0).transpose();
  rule.points.resize(2, ref.size());
  for (int q = 0; q < ref.size(); ++q) rule.points.col(q) = a + rule.params(q) * (b - a);
  rule.weights = (b - a).norm() * ref.weights;
  return rule;
}

namespace {

double fixed_rule(const std::function<double(double)>& f, const QuadratureRule& r, double a, double b) {
  double sum = 0.0;
  for (int q = 0; q < r.size(); ++q) sum += r.weights(q) * f(a + (b - a) * r.points(0, q));
  return (b - a) * sum;
}

// `floor` is the rounding-noise level below which splitting cannot help.
double adapt(const std::function<double(double)>& f, const QuadratureRule& lo, const QuadratureRule& hi, double a,
             double b, double tol, double floor, int depth) {
  const double coarse = fixed_rule(f, lo, a, b);
  const double fine = fixed_rule(f, hi, a, b);
  if (depth <= 0 || std::abs(fine - coarse) <= std::max(tol, floor)) return fine;
  const double m = 0.5 * (a + b);
  return adapt(f, lo, hi, a, m, 0.5 * tol, floor, depth - 1) + adapt(f, lo, hi, m, b, 0.5 * tol, floor, depth - 1);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
  const QuadratureRule lo = line_rule(19);
  const QuadratureRule hi = line_rule(39);
  double scale = 0.0;
  for (int k = 0; k < 16; ++k) scale += std::abs(fixed_rule(f, hi, a + (b - a) * k / 16.0, a + (b - a) * (k + 1) / 16.0));
  return adapt(f, lo, hi, a, b, tol, 1e-16 * scale, max_depth);
}

double adaptive_integrate_2d(const std::function<double(double, double)>& f, double x0, double x1, double y0,
                             double y1, double tol) {
  const double inner_tol = tol / std::max(1.0, y1 - y0);
  return adaptive_integrate(
      [&](double y) { return adaptive_integrate([&](double x) { return f(x, y); }, x0, x1, inner_tol); }, y0, y1,
      tol);
}

}  // namespace dpg
