#include "dpg/cases.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dpg/polynomial.hpp"
#include "dpg/quadrature.hpp"

namespace dpg {

namespace {

using std::numbers::pi;

struct Manufactured {
  ScalarFunction u;
  VectorFunction grad;
  ScalarFunction laplacian;
};

// Fills source, Dirichlet data and exact fields from a manufactured solution.
void install(TestCase& tc, const Manufactured& m) {
  const double eps = tc.problem.epsilon;
  const Point beta = tc.problem.beta;
  tc.problem.pure_diffusion = beta.isZero(0.0);
  tc.problem.source = [m, eps, beta](const Point& x) { return beta.dot(m.grad(x)) - eps * m.laplacian(x); };
  tc.problem.dirichlet = m.u;
  tc.exact_u = m.u;
  tc.exact_sigma = [m, eps](const Point& x) -> Point { return eps * m.grad(x); };
}

// x + (e^{x/eps} - 1)/(1 - e^{1/eps}), written without overflow.
struct Layer {
  double eps;
  double c;
  explicit Layer(double e) : eps(e), c(1.0 / -std::expm1(-1.0 / e)) {}
  double f(double x) const { return x - c * (std::exp((x - 1.0) / eps) - std::exp(-1.0 / eps)); }
  double df(double x) const { return 1.0 - c / eps * std::exp((x - 1.0) / eps); }
  double d2f(double x) const { return -c / (eps * eps) * std::exp((x - 1.0) / eps); }
};

Manufactured product(std::function<double(double)> f, std::function<double(double)> df,
                     std::function<double(double)> d2f) {
  Manufactured m;
  m.u = [f](const Point& x) { return f(x.x()) * f(x.y()); };
  m.grad = [f, df](const Point& x) -> Point {
    return {df(x.x()) * f(x.y()), f(x.x()) * df(x.y())};
  };
  m.laplacian = [f, d2f](const Point& x) { return d2f(x.x()) * f(x.y()) + f(x.x()) * d2f(x.y()); };
  return m;
}

double resolve_eps(const CaseParameters& p, double fallback) { return std::isnan(p.epsilon) ? fallback : p.epsilon; }

TestCase layer_primal(const std::string& name, const CaseParameters& p) {
  TestCase tc;
  tc.name = name;
  tc.initial_mesh = structured_rectangle(4, 4);
  tc.problem.epsilon = resolve_eps(p, 0.005);
  tc.problem.beta = Point(1.0, 1.0);
  const Layer l(tc.problem.epsilon);
  install(tc, product([l](double x) { return l.f(x); }, [l](double x) { return l.df(x); },
                      [l](double x) { return l.d2f(x); }));
  return tc;
}

double volume_target_exact(const TestCase& tc) {
  const auto& j = tc.target->j_omega;
  const auto& u = tc.exact_u;
  return adaptive_integrate_2d([&](double x, double y) { return j(Point(x, y)) * u(Point(x, y)); }, 0.0, 1.0, 0.0,
                               1.0, 1e-13);
}

}  // namespace

std::vector<std::string> case_names() {
  return {"boundary_layer", "reverse_layer", "gaussian_peak", "arctan_flux",
          "line_singularity", "lshape", "sine", "polynomial"};
}

TestCase make_case(const std::string& name, const CaseParameters& p) {
  if (name == "boundary_layer") return layer_primal(name, p);

  if (name == "reverse_layer") {
    TestCase tc = layer_primal(name, p);
    const double eps = tc.problem.epsilon;
    const Point beta = tc.problem.beta;
    // Dual solution eta(x, y) = L(1 - x) L(1 - y) with the primal layer profile L.
    const Layer l(eps);
    const Manufactured dual = product([l](double x) { return l.f(1.0 - x); }, [l](double x) { return -l.df(1.0 - x); },
                                      [l](double x) { return l.d2f(1.0 - x); });
    tc.target = TargetFunctional::volume(
        [dual, eps, beta](const Point& x) { return -beta.dot(dual.grad(x)) - eps * dual.laplacian(x); });
    tc.exact_target = volume_target_exact(tc);
    return tc;
  }

  if (name == "gaussian_peak") {
    TestCase tc = layer_primal(name, p);
    const double a = p.gauss_alpha, xc = p.gauss_xc, yc = p.gauss_yc;
    tc.target = TargetFunctional::volume([a, xc, yc](const Point& x) {
      return std::exp(-a * ((x.x() - xc) * (x.x() - xc) + (x.y() - yc) * (x.y() - yc)));
    });
    tc.exact_target = volume_target_exact(tc);
    return tc;
  }

  if (name == "arctan_flux") {
    TestCase tc;
    tc.name = name;
    tc.initial_mesh = structured_rectangle(4, 4);
    tc.problem.epsilon = resolve_eps(p, 0.01);
    tc.problem.beta = Point(1.0, 1.0);
    const double a = p.atan_alpha, x1 = p.atan_x1, x2 = p.atan_x2;
    auto f = [a, x1, x2](double x) { return std::atan(a * (x - x1)) + std::atan(a * (x2 - x)); };
    auto df = [a, x1, x2](double x) {
      return a / (1.0 + a * a * (x - x1) * (x - x1)) - a / (1.0 + a * a * (x2 - x) * (x2 - x));
    };
    auto d2f = [a, x1, x2](double x) {
      const double r1 = 1.0 + a * a * (x - x1) * (x - x1);
      const double r2 = 1.0 + a * a * (x2 - x) * (x2 - x);
      return -2.0 * a * a * a * (x - x1) / (r1 * r1) - 2.0 * a * a * a * (x2 - x) / (r2 * r2);
    };
    install(tc, product(f, df, d2f));
    tc.target = TargetFunctional::flux({{2, 1.0}});
    const double eps = tc.problem.epsilon;
    tc.exact_target = eps * df(1.0) * adaptive_integrate(f, 0.0, 1.0, 1e-14);
    return tc;
  }

  if (name == "line_singularity") {
    TestCase tc;
    tc.name = name;
    tc.initial_mesh = structured_rectangle(4, 4);
    tc.problem.epsilon = 1.0;
    const double g = p.ils_gamma, th = p.ils_theta;
    const double scale = std::pow(2.0, g);
    Manufactured m;
    m.u = [g, th, scale](const Point& x) {
      const double d = x.x() - th * x.y() - 0.5;
      return std::cos(pi * (x.y() - 0.5)) + (d > 0.0 ? scale * std::pow(d, g) : 0.0);
    };
    m.grad = [g, th, scale](const Point& x) -> Point {
      const double d = x.x() - th * x.y() - 0.5;
      Point gr(0.0, -pi * std::sin(pi * (x.y() - 0.5)));
      if (d > 0.0) gr += scale * g * std::pow(d, g - 1.0) * Point(1.0, -th);
      return gr;
    };
    m.laplacian = [g, th, scale](const Point& x) {
      const double d = x.x() - th * x.y() - 0.5;
      double lap = -pi * pi * std::cos(pi * (x.y() - 0.5));
      if (d > 0.0) lap += scale * g * (g - 1.0) * std::pow(d, g - 2.0) * (1.0 + th * th);
      return lap;
    };
    install(tc, m);
    return tc;
  }

  if (name == "lshape") {
    TestCase tc;
    tc.name = name;
    tc.initial_mesh = structured_lshape(2);
    tc.problem.epsilon = 1.0;
    tc.singularity = Point::Zero();
    auto angle = [](const Point& x) {
      double t = std::atan2(x.y(), x.x());
      return t < 0.0 ? t + 2.0 * pi : t;
    };
    Manufactured m;
    m.u = [angle](const Point& x) {
      return std::pow(x.norm(), 2.0 / 3.0) * std::sin(2.0 / 3.0 * angle(x));
    };
    m.grad = [angle](const Point& x) -> Point {
      const double r = x.norm();
      if (r == 0.0) return Point::Zero();
      const double t = angle(x);
      const double c = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
      return {-c * std::sin(t / 3.0), c * std::cos(t / 3.0)};
    };
    m.laplacian = [](const Point&) { return 0.0; };
    install(tc, m);
    return tc;
  }

  if (name == "sine") {
    TestCase tc;
    tc.name = name;
    tc.initial_mesh = structured_rectangle(4, 4);
    tc.problem.epsilon = 1.0;
    const double k = p.sine_k * pi;
    Manufactured m;
    m.u = [k](const Point& x) { return std::sin(k * x.x()) * std::sin(k * x.y()); };
    m.grad = [k](const Point& x) -> Point {
      return {k * std::cos(k * x.x()) * std::sin(k * x.y()), k * std::sin(k * x.x()) * std::cos(k * x.y())};
    };
    m.laplacian = [k](const Point& x) { return -2.0 * k * k * std::sin(k * x.x()) * std::sin(k * x.y()); };
    install(tc, m);
    return tc;
  }

  if (name == "polynomial") {
    TestCase tc;
    tc.name = name;
    tc.initial_mesh = structured_rectangle(4, 4);
    tc.problem.epsilon = 1.0;
    const int d = p.poly_degree;
    if (d < 0) throw std::invalid_argument("polynomial case needs a non-negative degree");
    Polynomial poly(d);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) poly.set(a, b, 1.0 / (1.0 + a + 2.0 * b));
    const Polynomial px = poly.derivative_x(), py = poly.derivative_y();
    const Polynomial lap = px.derivative_x() + py.derivative_y();
    Manufactured m;
    m.u = [poly](const Point& x) { return poly(x.x(), x.y()); };
    m.grad = [px, py](const Point& x) -> Point { return {px(x.x(), x.y()), py(x.x(), x.y())}; };
    m.laplacian = [lap](const Point& x) { return lap(x.x(), x.y()); };
    install(tc, m);
    return tc;
  }

  throw std::invalid_argument("unknown case '" + name + "'");
}

}  // namespace dpg
