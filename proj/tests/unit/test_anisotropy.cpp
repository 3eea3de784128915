#include "doctest.h"

#include <numbers>
#include <random>

#include "dpg/anisotropy.hpp"
#include "dpg/quadrature.hpp"

using namespace dpg;
using std::numbers::pi;

namespace {

HomogeneousComponent component(const Polynomial& p, int order) {
  HomogeneousComponent c;
  c.order = order;
  c.poly = p;
  c.negligible = !direction_stats(c);
  return c;
}

// Component with prescribed statistics; the polynomial is not needed by the objective.
HomogeneousComponent stats(int order, double A, double rho, double phi) {
  HomogeneousComponent c;
  c.order = order;
  c.A = A;
  c.rho = rho;
  c.phi = phi;
  c.A_perp = A / rho;
  c.negligible = false;
  return c;
}

// Coefficients of f in the orthonormal basis, by quadrature.
Eigen::VectorXd project(const ElementBasis& b, const std::array<Point, 3>& c, const std::function<double(Point)>& f) {
  const auto rule = triangle_rule(c, 2 * b.degree() + 2);
  const Eigen::MatrixXd v = b.values(rule.points);
  Eigen::VectorXd fv(rule.size());
  for (int k = 0; k < rule.size(); ++k) fv[k] = f(rule.points.col(k));
  return v.transpose() * rule.weights.asDiagonal() * fv;
}

double grid_minimum(const std::vector<HomogeneousComponent>& comps, double lambda, int n) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    const double beta = std::exp(std::log(50.0) * a / (n - 1));
    for (int b = 0; b < n; ++b) best = std::min(best, anisotropy_objective(comps, lambda, beta, pi * b / n));
  }
  return best;
}

}  // namespace

TEST_CASE("error density of simple representation functions") {
  const std::array<Point, 3> c{Point(-0.5, -0.4), Point(0.7, -0.2), Point(-0.2, 0.6)};
  const ElementBasis b(c, 2);
  const Point ctr = b.center();
  const int n = b.size();
  SUBCASE("psi_v = 1") {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(3 * n);
    y.segment(2 * n, n) = project(b, c, [](Point) { return 1.0; });
    const Polynomial e = error_density_poly(b, y, TestNorm::standard);
    for (double s : {-0.3, 0.0, 0.2}) CHECK(e(s, -s) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("psi_v = x about the centroid") {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(3 * n);
    y.segment(2 * n, n) = project(b, c, [ctr](Point x) { return x.x() - ctr.x(); });
    const Polynomial e = error_density_poly(b, y, TestNorm::scaled);
    const double w = std::sqrt(b.area());
    for (double s : {-0.3, 0.1, 0.25}) CHECK(e(s, 0.4 * s) == doctest::Approx(s * s + w).epsilon(1e-12));
  }
}

TEST_CASE("homogeneous decomposition") {
  Polynomial e(3);
  e.set(0, 0, 3.0);
  e.set(2, 1, 1.0);
  const auto comps = decompose_homogeneous(e);
  REQUIRE(comps.size() == 4);
  for (const auto& c : comps) CHECK(c.negligible == (c.order != 0 && c.order != 3));

  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  const int deg = 2 * (2 + 2);
  Polynomial r(deg);
  for (int a = 0; a <= deg; ++a)
    for (int b = 0; a + b <= deg; ++b) r.set(a, b, nd(rng));
  const auto parts = decompose_homogeneous(r);
  CHECK(parts.size() == static_cast<std::size_t>(deg + 1));
  Polynomial sum(deg);
  for (const auto& p : parts) sum = sum + p.poly;
  for (int a = 0; a <= deg; ++a)
    for (int b = 0; a + b <= deg; ++b) CHECK(sum.coeff(a, b) == doctest::Approx(r.coeff(a, b)).epsilon(1e-15));
}

TEST_CASE("direction statistics") {
  Polynomial iso(2);
  iso.set(2, 0, 1.0);
  iso.set(0, 2, 1.0);
  const auto a = component(iso, 2);
  CHECK(a.A == doctest::Approx(1.0));
  CHECK(a.A_perp == doctest::Approx(1.0));
  CHECK(a.rho == doctest::Approx(1.0));
  CHECK(a.phi == 0.0);

  Polynomial el(2);
  el.set(2, 0, 4.0);
  el.set(0, 2, 1.0);
  const auto b = component(el, 2);
  CHECK(b.A == doctest::Approx(4.0));
  CHECK(b.A_perp == doctest::Approx(1.0));
  CHECK(b.rho == doctest::Approx(4.0));
  CHECK(b.phi == doctest::Approx(0.0));

  // Quartic against a dense angular scan.
  Polynomial q(4);
  q.set(4, 0, 1.0);
  q.set(2, 2, 1.0);
  q.set(1, 3, 0.7);
  q.set(3, 1, -0.4);
  const auto c = component(q, 4);
  const int m = 1000000;
  double amax = 0.0, phimax = 0.0;
  for (int k = 0; k < m; ++k) {
    const double t = pi * k / m;
    const double v = std::abs(q(std::cos(t), std::sin(t)));
    if (v > amax) {
      amax = v;
      phimax = t;
    }
  }
  CHECK(c.A == doctest::Approx(amax).epsilon(1e-6));
  CHECK(std::abs(std::remainder(c.phi - phimax, pi)) < 1e-5);
  CHECK(c.A_perp == doctest::Approx(std::abs(q(std::cos(c.phi - pi / 2), std::sin(c.phi - pi / 2)))).epsilon(1e-12));
}

TEST_CASE("bound quadratic form: principal-direction equalities and quadratic sweep") {
  std::mt19937 rng(2);
  std::normal_distribution<double> nd;
  for (int order : {2, 4, 6}) {
    for (int trial = 0; trial < 20; ++trial) {
      Polynomial p(order);
      for (int a = 0; a <= order; ++a) p.set(a, order - a, nd(rng));
      const auto c = component(p, order);
      if (c.negligible || c.rho >= AnisotropyOptions{}.rho_max) continue;
      const Point along(std::cos(c.phi), std::sin(c.phi));
      const Point across(std::cos(c.phi - pi / 2), std::sin(c.phi - pi / 2));
      CHECK(std::abs(bound_quadform(c, along) - c.A) <= 1e-10 * c.A);
      CHECK(std::abs(bound_quadform(c, across) - c.A / c.rho) <= 1e-10 * c.A);
      CHECK(std::abs(bound_quadform(c, across) - c.A_perp) <= 1e-10 * c.A);
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial p(2);
    const double l1 = std::abs(nd(rng)) + 0.1, l2 = std::abs(nd(rng)) + 0.1, t = nd(rng);
    // Positive definite quadratic with eigenvalues l1, l2 rotated by t.
    const double cs = std::cos(t), sn = std::sin(t);
    p.set(2, 0, l1 * cs * cs + l2 * sn * sn);
    p.set(1, 1, 2.0 * (l1 - l2) * cs * sn);
    p.set(0, 2, l1 * sn * sn + l2 * cs * cs);
    const auto c = component(p, 2);
    for (int k = 0; k < 360; ++k) {
      const Point x(std::cos(k * pi / 180.0), std::sin(k * pi / 180.0));
      // The direction search resolves phi to about sqrt(machine epsilon).
      CHECK(std::abs(p(x.x(), x.y())) <= bound_quadform(c, x) * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("angular integral closed form") {
  for (int k = 0; k <= 8; ++k) {
    const double l1 = 2.3, l2 = 0.4;
    const double q = adaptive_integrate(
        [&](double t) { return std::pow(l1 * std::cos(t) * std::cos(t) + l2 * std::sin(t) * std::sin(t), k); }, 0.0,
        2.0 * pi);
    CHECK(ellipse_power_integral(l1, l2, k) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("objective: closed form equals the exact trapezoid rule") {
  const std::vector<HomogeneousComponent> comps{stats(2, 3.0, 5.0, 0.3), stats(4, 10.0, 40.0, 1.2),
                                                stats(6, 0.5, 2.0, 2.9)};
  for (double beta : {1.0, 2.5, 17.0})
    for (double phi : {0.0, 0.7, 2.2}) {
      const double closed = anisotropy_objective(comps, 0.01, beta, phi);
      const double trap = anisotropy_objective_trapezoid(comps, 0.01, beta, phi, 16);
      CHECK(closed == doctest::Approx(trap).epsilon(1e-12));
      CHECK(anisotropy_objective(comps, 0.01, beta, phi + pi) == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("minimizer examples") {
  SUBCASE("isotropic component") {
    const auto r = anisotropy_minimize({stats(2, 1.0, 1.0, 0.0)}, 1.0);
    CHECK(r.beta == 1.0);
  }
  SUBCASE("single quadratic: beta = sqrt(rho), major axis across phi_i") {
    const auto r = anisotropy_minimize({stats(2, 1.0, 4.0, 0.0)}, 1.0);
    CHECK(r.beta == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.phi == doctest::Approx(pi / 2).epsilon(1e-6));
    CHECK(r.objective <= grid_minimum({stats(2, 1.0, 4.0, 0.0)}, 1.0, 200) * (1.0 + 1e-9));
  }
  SUBCASE("single order-i component: beta = rho^(1/i)") {
    for (int i : {4, 6}) {
      const auto r = anisotropy_minimize({stats(i, 1.0, 100.0, 0.4)}, 1.0);
      CHECK(r.beta == doctest::Approx(std::pow(100.0, 1.0 / i)).epsilon(1e-4));
    }
  }
  SUBCASE("orthogonal competing components cancel") {
    const auto r = anisotropy_minimize({stats(2, 1.0, 4.0, 0.0), stats(2, 1.0, 4.0, pi / 2)}, 1.0);
    CHECK(r.beta == 1.0);
  }
  SUBCASE("no even components") {
    const auto r = anisotropy_minimize({stats(3, 1.0, 4.0, 0.0)}, 1.0);
    CHECK(r.beta == 1.0);
    CHECK(r.objective == 0.0);
  }
}

TEST_CASE("minimizer dominates a grid search and is rotation and scale invariant") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<HomogeneousComponent> comps;
    for (int i = 2; i <= 8; i += 2)
      comps.push_back(stats(i, std::pow(10.0, 3.0 * u(rng)), std::exp(6.0 * u(rng)), pi * u(rng)));
    const double lambda = 0.05 + 0.5 * u(rng);
    const auto r = anisotropy_minimize(comps, lambda);
    CHECK(r.objective <= grid_minimum(comps, lambda, 200) * 1.005);

    const double shift = 0.37;
    auto rotated = comps;
    for (auto& c : rotated) c.phi += shift;
    const auto rr = anisotropy_minimize(rotated, lambda);
    CHECK(rr.beta == doctest::Approx(r.beta).epsilon(1e-4));
    if (r.beta > 1.01) CHECK(std::abs(std::remainder(rr.phi - r.phi - shift, pi)) < 1e-4);

    auto scaled = comps;
    for (auto& c : scaled) c.A *= 7.5;
    const auto rs = anisotropy_minimize(scaled, lambda);
    CHECK(rs.beta == doctest::Approx(r.beta).epsilon(1e-4));
    CHECK(rs.objective == doctest::Approx(7.5 * r.objective).epsilon(1e-6));
  }
}
