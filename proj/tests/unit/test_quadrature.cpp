#include "doctest.h"

#include <cmath>

#include "dpg/polynomial.hpp"
#include "dpg/quadrature.hpp"

using namespace dpg;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST_CASE("reference triangle rules integrate monomials exactly") {
  for (int deg : {0, 1, 2, 5, 9, 14, 20}) {
    const auto rule = reference_triangle_rule(deg);
    CHECK(rule.weights.sum() == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double q = 0.0;
        for (int k = 0; k < rule.size(); ++k)
          q += rule.weights[k] * std::pow(rule.points(0, k), a) * std::pow(rule.points(1, k), b);
        // int_T x^a y^b = a! b! / (a + b + 2)!
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        CHECK(q == doctest::Approx(exact).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("physical triangle and edge rules") {
  const std::array<Point, 3> c{Point(1, 1), Point(3, 1.5), Point(1.5, 4)};
  const auto rule = triangle_rule(c, 4);
  const double area = 0.5 * ((c[1] - c[0]).x() * (c[2] - c[0]).y() - (c[1] - c[0]).y() * (c[2] - c[0]).x());
  CHECK(rule.weights.sum() == doctest::Approx(area));
  double mx = 0.0;
  for (int k = 0; k < rule.size(); ++k) mx += rule.weights[k] * rule.points(0, k);
  CHECK(mx / area == doctest::Approx((c[0].x() + c[1].x() + c[2].x()) / 3.0));

  const auto er = edge_rule(Point(0, 0), Point(3, 4), 5);
  CHECK(er.weights.sum() == doctest::Approx(5.0));
  double m2 = 0.0;
  for (int k = 0; k < er.size(); ++k) m2 += er.weights[k] * er.params[k] * er.params[k];
  CHECK(m2 == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("Gauss-Jacobi weights") {
  const auto r = gauss_jacobi(6, 1.0, 0.0);
  // int_{-1}^{1} (1 - x) x^2 dx = 2/3
  double q = 0.0;
  for (int k = 0; k < r.size(); ++k) q += r.weights[k] * r.points(0, k) * r.points(0, k);
  CHECK(q == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("adaptive integration") {
  CHECK(adaptive_integrate([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  // Boundary layer profile with width 1e-3.
  const double eps = 1e-3;
  const double v = adaptive_integrate([eps](double x) { return std::exp((x - 1.0) / eps); }, 0.0, 1.0);
  CHECK(v == doctest::Approx(eps * (1.0 - std::exp(-1.0 / eps))).epsilon(1e-11));
  const double v2 = adaptive_integrate_2d([](double x, double y) { return x * y * y; }, 0.0, 2.0, 0.0, 3.0);
  CHECK(v2 == doctest::Approx(2.0 * 9.0).epsilon(1e-12));
}

TEST_CASE("polynomial algebra") {
  Polynomial p(2);
  p.set(2, 0, 1.0);
  p.set(1, 1, -2.0);
  p.set(0, 0, 3.0);
  CHECK(p(2.0, 1.0) == doctest::Approx(4.0 - 4.0 + 3.0));
  CHECK(p.derivative_x()(2.0, 1.0) == doctest::Approx(2.0 * 2.0 - 2.0));
  CHECK(p.derivative_y()(2.0, 1.0) == doctest::Approx(-4.0));
  const Polynomial q = p * Polynomial::linear(1.0, 0.0, 1.0);
  CHECK(q.degree() == 3);
  CHECK(q(0.5, -0.7) == doctest::Approx(p(0.5, -0.7) * (1.0 - 0.7)));
  CHECK(p.homogeneous_part(2)(1.0, 1.0) == doctest::Approx(-1.0));
  CHECK(p.homogeneous_part(1)(1.0, 1.0) == 0.0);
  Eigen::Matrix2d a;
  a << 0.0, 1.0, 1.0, 0.0;  // swap x and y
  CHECK(p.linear_substitution(a)(1.0, 2.0) == doctest::Approx(p(2.0, 1.0)));
  CHECK(monomial_index(0, 0) == 0);
  CHECK(monomial_index(1, 0) == 1);
  CHECK(monomial_index(0, 1) == 2);
  CHECK(monomial_count(3) == 10);
}
