#include "dpg/anisotropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace dpg {

namespace {

using std::numbers::pi;
constexpr double kGolden = 0.6180339887498949;

double fold_pi(double a) {
  a = std::fmod(a, pi);
  if (a < 0.0) a += pi;
  if (a >= pi) a -= pi;
  return a;
}

// Minimizes f on [a, b] by golden-section search.
template <class F>
double golden_min(F&& f, double a, double b, double tol) {
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

}  // namespace

Polynomial error_density_poly(const ElementBasis& basis, const Eigen::VectorXd& coeffs, TestNorm norm) {
  const int nt = basis.size();
  if (coeffs.size() != 3 * nt) throw std::invalid_argument("error_density_poly: coefficient size mismatch");
  const Polynomial tx = basis.physical_polynomial(coeffs.segment(0, nt));
  const Polynomial ty = basis.physical_polynomial(coeffs.segment(nt, nt));
  const Polynomial v = basis.physical_polynomial(coeffs.segment(2 * nt, nt));
  const Polynomial vx = v.derivative_x(), vy = v.derivative_y();
  const Polynomial div = tx.derivative_x() + ty.derivative_y();
  const double w = test_norm_weight(norm, basis.area());
  return v * v + tx * tx + ty * ty + w * (vx * vx + vy * vy + div * div);
}

std::vector<HomogeneousComponent> decompose_homogeneous(const Polynomial& e, const AnisotropyOptions& opt) {
  std::vector<HomogeneousComponent> out(e.degree() + 1);
  double amax = 0.0;
  for (int i = 0; i <= e.degree(); ++i) {
    out[i].order = i;
    out[i].poly = e.homogeneous_part(i);
    if (i == 0) {
      out[i].A = out[i].A_perp = std::abs(e.coeff(0, 0));
    } else {
      direction_stats(out[i], opt);
    }
    amax = std::max(amax, out[i].A);
  }
  for (auto& c : out) c.negligible = !(c.A > opt.drop_tol * amax) || amax == 0.0;
  return out;
}

bool direction_stats(HomogeneousComponent& c, const AnisotropyOptions& opt) {
  if (c.order < 1) throw std::invalid_argument("direction_stats: order must be >= 1");
  const auto& p = c.poly;
  auto mag = [&p](double phi) { return std::abs(p(std::cos(phi), std::sin(phi))); };
  const int n = opt.scan_points;
  const double step = pi / n;
  int best = 0;
  double fmax = -1.0, fmin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double f = mag(k * step);
    if (f > fmax) {
      fmax = f;
      best = k;
    }
    fmin = std::min(fmin, f);
  }
  if (fmax <= 0.0) {
    c.A = c.A_perp = 0.0;
    c.rho = 1.0;
    c.phi = 0.0;
    return false;
  }
  double phi = 0.0;
  if (fmax - fmin > 1e-12 * fmax) {
    phi = golden_min([&](double a) { return -mag(a); }, (best - 1) * step, (best + 1) * step, 1e-10);
    phi = fold_pi(phi);
  }
  c.phi = phi;
  c.A = std::max(mag(phi), fmax);
  c.A_perp = mag(phi - 0.5 * pi);
  c.rho = c.A_perp > 0.0 ? std::clamp(c.A / c.A_perp, 1.0, opt.rho_max) : opt.rho_max;
  return true;
}

double bound_quadform(const HomogeneousComponent& c, const Point& x) {
  const double cs = std::cos(c.phi), sn = std::sin(c.phi);
  // Coordinates along and across phi.
  const double a = cs * x.x() + sn * x.y();
  const double b = -sn * x.x() + cs * x.y();
  const double q = a * a + std::pow(c.rho, -2.0 / c.order) * b * b;
  return c.A * std::pow(q, 0.5 * c.order);
}

double ellipse_power_integral(double lambda1, double lambda2, int k) {
  // int_0^{2 pi} cos^{2a} sin^{2b} = 2 pi (2a-1)!! (2b-1)!! / (2(a+b))!!
  static const auto moments = [] {
    std::array<std::array<double, 16>, 16> m{};
    for (int a = 0; a < 16; ++a) {
      for (int b = 0; a + b < 16; ++b) {
        double v = 2.0 * pi;
        for (int j = 1; j <= a; ++j) v *= (2.0 * j - 1.0);
        for (int j = 1; j <= b; ++j) v *= (2.0 * j - 1.0);
        for (int j = 1; j <= a + b; ++j) v /= 2.0 * j;
        m[a][b] = v;
      }
    }
    return m;
  }();
  if (k < 0 || k >= 16) throw std::invalid_argument("ellipse_power_integral: order out of range");
  double total = 0.0, binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    total += binom * ipow(lambda1, j) * ipow(lambda2, k - j) * moments[j][k - j];
    binom = binom * (k - j) / (j + 1);
  }
  return total;
}

double anisotropy_objective(const std::vector<HomogeneousComponent>& comps, double lambda, double beta, double phi,
                            const AnisotropyOptions& opt) {
  if (opt.theta_points > 0) return anisotropy_objective_trapezoid(comps, lambda, beta, phi, opt.theta_points);
  double total = 0.0;
  for (const auto& c : comps) {
    if (c.order < 2 || c.order % 2 != 0 || c.negligible) continue;
    const int i = c.order;
    const double rp = std::pow(c.rho, -2.0 / i);
    const double d = phi - c.phi;
    const double cd = std::cos(d), sd = std::sin(d);
    // g(theta) = e^T G e with det G = rho' and the trace below; the integral
    // of g^{i/2} depends on the eigenvalues only.
    const double tr = beta * (cd * cd + rp * sd * sd) + (sd * sd + rp * cd * cd) / beta;
    const double disc = std::sqrt(std::max(0.25 * tr * tr - rp, 0.0));
    const double l1 = 0.5 * tr + disc, l2 = std::max(0.5 * tr - disc, 0.0);
    total += c.A * std::pow(lambda, 0.5 * (i + 2)) / (i + 2) * ellipse_power_integral(l1, l2, i / 2);
  }
  return total;
}

double anisotropy_objective_trapezoid(const std::vector<HomogeneousComponent>& comps, double lambda, double beta,
                                      double phi, int theta_points) {
  const int m = theta_points;
  double total = 0.0;
  for (const auto& c : comps) {
    if (c.order < 2 || c.order % 2 != 0 || c.negligible) continue;
    const int i = c.order;
    const double rp = std::pow(c.rho, -2.0 / i);
    const double d = phi - c.phi;
    const double cd = std::cos(d), sd = std::sin(d);
    const double g11 = beta * (cd * cd + rp * sd * sd);
    const double g22 = (sd * sd + rp * cd * cd) / beta;
    const double g12 = -sd * cd * (1.0 - rp);
    double integral = 0.0;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * pi * k / m;
      const double ct = std::cos(th), st = std::sin(th);
      const double g = g11 * ct * ct + g22 * st * st + 2.0 * g12 * st * ct;
      integral += ipow(std::max(g, 0.0), i / 2);
    }
    integral *= 2.0 * pi / m;
    total += c.A * std::pow(lambda, 0.5 * (i + 2)) / (i + 2) * integral;
  }
  return total;
}

AnisotropyResult anisotropy_minimize(const std::vector<HomogeneousComponent>& comps, double lambda,
                                     const AnisotropyOptions& opt) {
  const bool any = std::any_of(comps.begin(), comps.end(), [](const HomogeneousComponent& c) {
    return c.order >= 2 && c.order % 2 == 0 && !c.negligible;
  });
  if (!any) return {1.0, 0.0, 0.0};

  auto obj = [&](double beta, double phi) { return anisotropy_objective(comps, lambda, beta, phi, opt); };
  const double lmax = std::log(opt.beta_max);
  const int nb = 24, nphi = 36;

  // Coarse grid start.
  double best = std::numeric_limits<double>::infinity(), u = 0.0, phi = 0.0;
  for (int a = 0; a < nb; ++a) {
    const double ua = lmax * a / (nb - 1);
    for (int b = 0; b < nphi; ++b) {
      const double pb = pi * b / nphi;
      const double f = obj(std::exp(ua), pb);
      if (f < best) {
        best = f;
        u = ua;
        phi = pb;
      }
    }
  }

  for (int it = 0; it < opt.max_iterations; ++it) {
    const double u_old = u, phi_old = phi;

    // Search in log(beta) with phi fixed.
    {
      const double du = lmax / (nb - 1);
      int ib = 0;
      double fb = std::numeric_limits<double>::infinity();
      for (int a = 0; a < nb; ++a) {
        const double f = obj(std::exp(lmax * a / (nb - 1)), phi);
        if (f < fb) {
          fb = f;
          ib = a;
        }
      }
      const double lo = std::max(0.0, (ib - 1) * du), hi = std::min(lmax, (ib + 1) * du);
      u = golden_min([&](double x) { return obj(std::exp(x), phi); }, lo, hi, 1e-10);
    }
    // Search in phi over a window of width pi with beta fixed.
    {
      const double beta = std::exp(u);
      const double dphi = pi / nphi;
      const double start = phi - 0.5 * pi;
      int ib = 0;
      double fb = std::numeric_limits<double>::infinity();
      for (int b = 0; b < nphi; ++b) {
        const double f = obj(beta, start + b * dphi);
        if (f < fb) {
          fb = f;
          ib = b;
        }
      }
      const double c = start + ib * dphi;
      phi = golden_min([&](double x) { return obj(beta, x); }, c - dphi, c + dphi, 1e-10);
    }

    const double dphi = std::abs(std::remainder(phi - phi_old, pi));
    if (std::abs(std::exp(u) - std::exp(u_old)) < opt.tolerance && dphi < opt.tolerance) break;
  }

  AnisotropyResult r;
  r.beta = std::exp(u);
  r.phi = fold_pi(phi);
  if (r.beta - 1.0 < opt.tolerance) {
    r.beta = 1.0;
    r.phi = 0.0;
  }
  r.objective = obj(r.beta, r.phi);
  return r;
}

void write_anisotropy_csv(const std::filesystem::path& path, const std::vector<AnisotropyRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "element,i,A,rho,phi,beta_M,phi_M\n";
  for (const auto& r : records) {
    for (const auto& c : r.components) {
      if (c.order < 1 || c.negligible) continue;
      out << r.element << ',' << c.order << ',' << c.A << ',' << c.rho << ',' << c.phi << ',' << r.result.beta << ','
          << r.result.phi << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace dpg
