#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dpg/mesh.hpp"

namespace dpg {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Area of a unit triangle per unit density: |K| = alpha / d.
inline constexpr double kUnitTriangleAreaFactor = 0.75 * std::numbers::sqrt3;

/// Symmetric 2x2 tensor stored as (m11, m12, m22).
template <typename Scalar>
struct MetricTensor {
  Scalar m11{1}, m12{0}, m22{1};

  using Matrix = Eigen::Matrix<Scalar, 2, 2>;

  static MetricTensor from_matrix(const Matrix& m) { return {m(0, 0), Scalar(0.5) * (m(0, 1) + m(1, 0)), m(1, 1)}; }

  Matrix matrix() const {
    Matrix m;
    m << m11, m12, m12, m22;
    return m;
  }
  Scalar det() const { return m11 * m22 - m12 * m12; }
  bool is_spd() const { return m11 > Scalar(0) && det() > Scalar(0); }

  /// Squared length e^T M e.
  Scalar quad(const Eigen::Matrix<Scalar, 2, 1>& e) const {
    return m11 * e.x() * e.x() + Scalar(2) * m12 * e.x() * e.y() + m22 * e.y() * e.y();
  }
};

using Metric = MetricTensor<double>;

template <typename Scalar>
struct MetricDecomposition {
  Scalar density{1};       // d = sqrt(det M) = 1 / (h1 h2)
  Scalar aspect_ratio{1};  // h_major / h_minor >= 1
  Scalar orientation{0};   // direction of the major axis in [0, pi)
};

using Decomposition = MetricDecomposition<double>;

namespace detail {

template <typename Scalar>
Scalar fold_angle(Scalar a) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  a = std::fmod(a, pi);
  if (a < Scalar(0)) a += pi;
  if (a >= pi) a -= pi;
  return a;
}

/// Eigenpairs of a symmetric 2x2 matrix, smallest eigenvalue first.
template <typename Scalar>
void sym_eigen(const MetricTensor<Scalar>& m, Scalar& lmin, Scalar& lmax, Scalar& angle_min) {
  const Scalar half_tr = Scalar(0.5) * (m.m11 + m.m22);
  const Scalar half_diff = Scalar(0.5) * (m.m11 - m.m22);
  const Scalar r = std::hypot(half_diff, m.m12);
  lmin = half_tr - r;
  lmax = half_tr + r;
  // Guard the smaller eigenvalue against cancellation.
  if (lmax > Scalar(0)) lmin = m.det() / lmax;
  // Eigenvector of lmax is at atan2(m12, half_diff)/2; lmin is orthogonal.
  angle_min = r > Scalar(0) ? Scalar(0.5) * std::atan2(m.m12, half_diff) + std::numbers::pi_v<Scalar> / Scalar(2)
                            : Scalar(0);
}

template <typename Scalar>
MetricTensor<Scalar> from_eigen(Scalar lmin, Scalar lmax, Scalar angle_min) {
  const Scalar c = std::cos(angle_min), s = std::sin(angle_min);
  return {lmin * c * c + lmax * s * s, (lmin - lmax) * c * s, lmin * s * s + lmax * c * c};
}

}  // namespace detail

/// Spectral split into density, aspect ratio and major-axis orientation.
template <typename Scalar>
MetricDecomposition<Scalar> metric_decompose(const MetricTensor<Scalar>& m) {
  if (!m.is_spd()) throw MetricError("metric_decompose: tensor is not SPD");
  Scalar lmin, lmax, angle;
  detail::sym_eigen(m, lmin, lmax, angle);
  MetricDecomposition<Scalar> dec;
  dec.density = std::sqrt(lmin * lmax);
  dec.aspect_ratio = std::sqrt(lmax / lmin);
  dec.orientation = dec.aspect_ratio == Scalar(1) ? Scalar(0) : detail::fold_angle(angle);
  return dec;
}

/// Inverse of metric_decompose: eigenvalue d/beta along the major axis and
/// d*beta across it.
template <typename Scalar>
MetricTensor<Scalar> metric_compose(const MetricDecomposition<Scalar>& dec) {
  if (!(dec.density > Scalar(0))) throw MetricError("metric_compose: density must be positive");
  if (!(dec.aspect_ratio >= Scalar(1))) throw MetricError("metric_compose: aspect ratio must be >= 1");
  return detail::from_eigen(dec.density / dec.aspect_ratio, dec.density * dec.aspect_ratio, dec.orientation);
}

/// Matrix logarithm of an SPD tensor.
template <typename Scalar>
MetricTensor<Scalar> metric_log(const MetricTensor<Scalar>& m) {
  Scalar lmin, lmax, angle;
  detail::sym_eigen(m, lmin, lmax, angle);
  return detail::from_eigen(std::log(lmin), std::log(lmax), angle);
}

/// Matrix exponential of a symmetric tensor.
template <typename Scalar>
MetricTensor<Scalar> metric_exp(const MetricTensor<Scalar>& l) {
  const Scalar half_tr = Scalar(0.5) * (l.m11 + l.m22);
  const Scalar half_diff = Scalar(0.5) * (l.m11 - l.m22);
  const Scalar r = std::hypot(half_diff, l.m12);
  const Scalar angle = r > Scalar(0) ? Scalar(0.5) * std::atan2(l.m12, half_diff) + std::numbers::pi_v<Scalar> / Scalar(2)
                                     : Scalar(0);
  return detail::from_eigen(std::exp(half_tr - r), std::exp(half_tr + r), angle);
}

/// The unique SPD tensor under which the triangle is unit with e^T M e = 3.
Metric implied_metric(const Point& a, const Point& b, const Point& c);

struct AreaDensity {
  double area;
  double density;
};

/// Signed area and density of the implied metric; area * density = 3 sqrt(3) / 4.
AreaDensity element_area_density(const Point& a, const Point& b, const Point& c);

/// Vertex-based metric field on a triangulation, interpolated log-Euclidean
/// (exp of the barycentric mean of matrix logarithms) inside each triangle.
class MetricField {
 public:
  MetricField() = default;
  MetricField(const Triangulation& mesh, std::vector<Metric> vertex_metrics);

  const std::vector<Metric>& vertex_metrics() const { return metrics_; }
  const Triangulation& mesh() const { return *mesh_; }

  /// Metric at an arbitrary point of the mesh; throws if x is outside.
  Metric at(const Point& x) const;
  /// Triangle containing x, or -1.
  int locate(const Point& x) const;

 private:
  std::shared_ptr<const Triangulation> mesh_;
  std::vector<Metric> metrics_;
  std::vector<Metric> logs_;
  // Uniform bucket grid over triangle bounding boxes.
  Point origin_ = Point::Zero();
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

/// Integral over [0,1] of sqrt(e^T M(x1 + t e) e), 5-point Gauss-Legendre.
double riemannian_edge_length(const MetricField& field, const Point& x1, const Point& x2);

/// Same integral along a segment whose endpoint metrics are known, with the
/// metric interpolated log-Euclidean between the endpoints.
double riemannian_edge_length(const Metric& log_m1, const Metric& log_m2, const Point& x1, const Point& x2);

/// Per-vertex exp of the area-weighted mean of log(M_K) over incident elements.
MetricField vertex_metric_from_elements(const Triangulation& mesh, std::span<const Metric> element_metrics);

/// MEDIT `.sol` file with one symmetric tensor per vertex.
void write_metric(const MetricField& field, const std::filesystem::path& path);
std::vector<Metric> read_metric(const std::filesystem::path& path);

}  // namespace dpg
