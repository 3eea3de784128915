#include "dpg/continuous_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace dpg {

namespace {

double weight_sum(std::span<const double> eta, int p) {
  double s = 0.0;
  for (double e : eta) {
    if (e < 0.0) throw std::invalid_argument("indicators must be non-negative");
    s += std::pow(e, 2.0 / (p + 2));
  }
  return s;
}

void check_complexity(double N) {
  if (!(N > 0.0)) throw std::invalid_argument("complexity N must be positive");
}

}  // namespace

double abar(double eta, double area, int p) {
  if (!(area > 0.0)) throw std::invalid_argument("abar: area must be positive");
  return eta * eta / std::pow(area, p + 2);
}

std::vector<double> optimal_density(std::span<const double> eta, std::span<const double> areas, double N, int p) {
  check_complexity(N);
  if (eta.size() != areas.size()) throw std::invalid_argument("optimal_density: length mismatch");
  const double s = weight_sum(eta, p);
  std::vector<double> d(eta.size());
  if (s == 0.0) {
    const double omega = std::accumulate(areas.begin(), areas.end(), 0.0);
    std::fill(d.begin(), d.end(), N / omega);
    return d;
  }
  for (std::size_t k = 0; k < eta.size(); ++k) d[k] = N * std::pow(eta[k], 2.0 / (p + 2)) / (areas[k] * s);
  return d;
}

double equidistributed_error(std::span<const double> eta, double N, int p) {
  check_complexity(N);
  const double h = 0.5 * (p + 2);
  return std::pow(kUnitAlpha, h) * std::pow(N, -h) * std::pow(weight_sum(eta, p), h);
}

double predicted_error(std::span<const double> eta, double N, int p) {
  check_complexity(N);
  return std::pow(kUnitAlpha / N, 0.5 * (p + 1)) * std::pow(weight_sum(eta, p), 0.5 * (p + 2));
}

std::vector<double> regularize(std::span<const double> eta, double N, int p, const SizingOptions& opt) {
  const double floor = opt.regularization_floor * equidistributed_error(eta, N, p);
  std::vector<double> out(eta.begin(), eta.end());
  for (double& e : out) e = std::max(e, floor);
  return out;
}

std::vector<double> clamp_density(std::span<const double> density, std::span<const double> areas, double N,
                                  const SizingOptions& opt) {
  check_complexity(N);
  const double omega = std::accumulate(areas.begin(), areas.end(), 0.0);
  const double lo = opt.clamp_low * N / omega, hi = opt.clamp_high * N / omega;
  std::vector<double> d(density.begin(), density.end());
  std::vector<char> fixed(d.size(), 0);
  // Pin violators at their bound and rescale the free entries until nothing moves.
  for (std::size_t pass = 0; pass <= d.size(); ++pass) {
    double pinned = 0.0, free = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) (fixed[k] ? pinned : free) += d[k] * areas[k];
    if (free > 0.0) {
      const double s = (N - pinned) / free;
      for (std::size_t k = 0; k < d.size(); ++k)
        if (!fixed[k]) d[k] *= s;
    }
    bool changed = false;
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (fixed[k]) continue;
      if (d[k] < lo || d[k] > hi) {
        d[k] = std::clamp(d[k], lo, hi);
        fixed[k] = 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

AdaptPlan build_plan(std::span<const double> density, std::span<const double> areas,
                     const std::vector<AnisotropyResult>& anisotropy, double predicted) {
  if (density.size() != areas.size() || density.size() != anisotropy.size()) {
    throw std::invalid_argument("build_plan: length mismatch");
  }
  AdaptPlan plan;
  plan.density.assign(density.begin(), density.end());
  plan.anisotropy = anisotropy;
  plan.predicted_error = predicted;
  plan.metrics.reserve(density.size());
  for (std::size_t k = 0; k < density.size(); ++k) {
    plan.metrics.push_back(metric_compose(Decomposition{density[k], anisotropy[k].beta, anisotropy[k].phi}));
    plan.complexity += density[k] * areas[k];
  }
  return plan;
}

void write_plan_csv(const std::filesystem::path& path, const AdaptPlan& plan, std::span<const double> eta,
                    std::span<const double> areas, int p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "element,eta,abar,d_star,beta_M,phi_M\n";
  for (std::size_t k = 0; k < plan.density.size(); ++k) {
    out << k << ',' << eta[k] << ',' << abar(eta[k], areas[k], p) << ',' << plan.density[k] << ','
        << plan.anisotropy[k].beta << ',' << plan.anisotropy[k].phi << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace dpg
