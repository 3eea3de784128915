#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "dpg/assembly.hpp"
#include "dpg/basis.hpp"
#include "dpg/polynomial.hpp"

namespace dpg {

struct AnisotropyOptions {
  double rho_max = 1e4;
  double beta_max = 100.0;
  double drop_tol = 1e-12;   // relative threshold for negligible components
  int theta_points = 0;      // > 0: periodic trapezoid with this many points; 0: closed form
  int scan_points = 720;     // direction scan over [0, pi)
  double tolerance = 1e-6;   // alternate-search stopping tolerance
  int max_iterations = 50;
};

struct HomogeneousComponent {
  int order = 0;
  Polynomial poly;  // only terms of total degree `order`, about the centroid
  double A = 0.0, A_perp = 0.0, rho = 1.0, phi = 0.0;
  bool negligible = true;
};

struct AnisotropyResult {
  double beta = 1.0;
  double phi = 0.0;
  double objective = 0.0;
};

/// e = psi_v^2 + |psi_tau|^2 + w (|grad psi_v|^2 + (div psi_tau)^2), w = 1 or sqrt|K|,
/// as a polynomial in physical offsets from the element centroid. `coeffs` are
/// test-basis coefficients in the order [tau_x, tau_y, v].
Polynomial error_density_poly(const ElementBasis& basis, const Eigen::VectorXd& coeffs, TestNorm norm);

/// Components of orders 0..degree; statistics are filled for every order >= 1.
std::vector<HomogeneousComponent> decompose_homogeneous(const Polynomial& e, const AnisotropyOptions& opt = {});

/// Fills A, A_perp, rho, phi of a homogeneous component of order >= 1.
/// Returns false (component untouched) when the polynomial vanishes.
bool direction_stats(HomogeneousComponent& c, const AnisotropyOptions& opt = {});

/// A_i (x^T Q D Q^T x)^{i/2} with D = diag(1, rho^{-2/i}) and Q the rotation by phi.
double bound_quadform(const HomogeneousComponent& c, const Point& x);

/// Objective of the ellipse bound at (beta, phi) for element scale lambda = 1/d.
/// The angular integrals are exact (closed form) unless opt.theta_points > 0.
double anisotropy_objective(const std::vector<HomogeneousComponent>& comps, double lambda, double beta, double phi,
                            const AnisotropyOptions& opt = {});

/// Same objective with the angular integrals by an m-point periodic trapezoid
/// rule, exact once m exceeds the highest component order.
double anisotropy_objective_trapezoid(const std::vector<HomogeneousComponent>& comps, double lambda, double beta,
                                      double phi, int theta_points);

/// int_0^{2 pi} (l1 cos^2 + l2 sin^2)^k dtheta
double ellipse_power_integral(double lambda1, double lambda2, int k);

/// Alternate golden-section search in beta and phi over the even components.
AnisotropyResult anisotropy_minimize(const std::vector<HomogeneousComponent>& comps, double lambda,
                                     const AnisotropyOptions& opt = {});

/// Per-element diagnostics row.
struct AnisotropyRecord {
  int element;
  std::vector<HomogeneousComponent> components;
  AnisotropyResult result;
};
/// CSV with columns element,i,A,rho,phi,beta_M,phi_M (one row per non-negligible component).
void write_anisotropy_csv(const std::filesystem::path& path, const std::vector<AnisotropyRecord>& records);

}  // namespace dpg
