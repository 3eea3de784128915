#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "dpg/anisotropy.hpp"
#include "dpg/metric.hpp"

namespace dpg {

/// Area of a metric-unit triangle times its density: 3 sqrt(3) / 4.
inline constexpr double kUnitAlpha = kUnitTriangleAreaFactor;

struct SizingOptions {
  double regularization_floor = 0.1;  // eta_reg = max(eta, floor * e*)
  double clamp_low = 1e-3;            // d* >= clamp_low * N / |Omega|
  double clamp_high = 1e6;            // d* <= clamp_high * N / |Omega|
};

/// eta^2 / |K|^{p+2}
double abar(double eta, double area, int p);

/// d*_K = N eta_K^{2/(p+2)} / (|K| sum eta^{2/(p+2)}). Uniform N/|Omega| when all eta vanish.
std::vector<double> optimal_density(std::span<const double> eta, std::span<const double> areas, double N, int p);

/// alpha^{(p+2)/2} N^{-(p+2)/2} (sum eta^{2/(p+2)})^{(p+2)/2}
double equidistributed_error(std::span<const double> eta, double N, int p);

/// (alpha/N)^{(p+1)/2} (sum eta^{2/(p+2)})^{(p+2)/2}
double predicted_error(std::span<const double> eta, double N, int p);

/// max(eta_K, floor * e*)
std::vector<double> regularize(std::span<const double> eta, double N, int p, const SizingOptions& opt = {});

/// Clamps d* into [low, high] * N / |Omega| and rescales to keep sum d*|K| = N.
std::vector<double> clamp_density(std::span<const double> density, std::span<const double> areas, double N,
                                  const SizingOptions& opt = {});

struct AdaptPlan {
  std::vector<double> density;  // d* per element
  std::vector<AnisotropyResult> anisotropy;
  std::vector<Metric> metrics;  // per element
  double predicted_error = 0.0;
  double complexity = 0.0;      // sum d* |K|
};

/// Composes the per-element target metrics from densities and anisotropy.
AdaptPlan build_plan(std::span<const double> density, std::span<const double> areas,
                     const std::vector<AnisotropyResult>& anisotropy, double predicted);

/// CSV with columns element,eta,abar,d_star,beta_M,phi_M.
void write_plan_csv(const std::filesystem::path& path, const AdaptPlan& plan, std::span<const double> eta,
                    std::span<const double> areas, int p);

}  // namespace dpg
