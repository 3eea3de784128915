#include "dpg/metric.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace dpg {

namespace {

void check_nondegenerate(const Point& a, const Point& b, const Point& c) {
  const Point lo = a.cwiseMin(b).cwiseMin(c);
  const Point hi = a.cwiseMax(b).cwiseMax(c);
  const double diag2 = (hi - lo).squaredNorm();
  if (std::abs(signed_area(a, b, c)) < 1e-14 * diag2 || diag2 == 0.0) {
    throw MetricError("degenerate triangle");
  }
}

// 5-point Gauss-Legendre on [0,1].
constexpr std::array<double, 5> kGl5Nodes = {0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155,
                                             0.95308992296933200};
constexpr std::array<double, 5> kGl5Weights = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                               0.23931433524968324, 0.11846344252809454};

}  // namespace

Metric implied_metric(const Point& a, const Point& b, const Point& c) {
  check_nondegenerate(a, b, c);
  const std::array<Point, 3> edges = {b - a, c - b, a - c};
  Eigen::Matrix3d lhs;
  for (int k = 0; k < 3; ++k) {
    const Point& e = edges[k];
    lhs.row(k) << e.x() * e.x(), 2.0 * e.x() * e.y(), e.y() * e.y();
  }
  const Eigen::Vector3d m = lhs.partialPivLu().solve(Eigen::Vector3d::Constant(3.0));
  Metric out{m(0), m(1), m(2)};
  if (!out.is_spd()) throw MetricError("implied metric is not SPD");
  return out;
}

AreaDensity element_area_density(const Point& a, const Point& b, const Point& c) {
  const Metric m = implied_metric(a, b, c);
  return {signed_area(a, b, c), std::sqrt(m.det())};
}

MetricField::MetricField(const Triangulation& mesh, std::vector<Metric> vertex_metrics)
    : mesh_(std::make_shared<const Triangulation>(mesh)), metrics_(std::move(vertex_metrics)) {
  if (static_cast<int>(metrics_.size()) != mesh.num_vertices()) {
    throw MetricError("metric field size does not match the vertex count");
  }
  logs_.reserve(metrics_.size());
  for (const auto& m : metrics_) {
    if (!m.is_spd()) throw MetricError("metric field contains a non-SPD tensor");
    logs_.push_back(metric_log(m));
  }
  Point lo = mesh.vertices().front(), hi = lo;
  for (const auto& p : mesh.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const int n_target = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()))));
  cell_ = std::max((hi - lo).maxCoeff() / n_target, 1e-300);
  origin_ = lo;
  nx_ = static_cast<int>((hi.x() - lo.x()) / cell_) + 1;
  ny_ = static_cast<int>((hi.y() - lo.y()) / cell_) + 1;
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const Point tlo = c[0].cwiseMin(c[1]).cwiseMin(c[2]);
    const Point thi = c[0].cwiseMax(c[1]).cwiseMax(c[2]);
    const int i0 = std::clamp(static_cast<int>((tlo.x() - origin_.x()) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((thi.x() - origin_.x()) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((tlo.y() - origin_.y()) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((thi.y() - origin_.y()) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
}

namespace {

Eigen::Vector3d barycentric(const std::array<Point, 3>& c, const Point& x) {
  const double area = signed_area(c[0], c[1], c[2]);
  return {signed_area(x, c[1], c[2]) / area, signed_area(c[0], x, c[2]) / area, signed_area(c[0], c[1], x) / area};
}

}  // namespace

int MetricField::locate(const Point& x) const {
  const int i = std::clamp(static_cast<int>((x.x() - origin_.x()) / cell_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((x.y() - origin_.y()) / cell_), 0, ny_ - 1);
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    const double m = barycentric(mesh_->corners(t), x).minCoeff();
    if (m > best_min) {
      best_min = m;
      best = t;
    }
  }
  // Accept points on or within rounding distance of the boundary.
  return best_min > -1e-9 ? best : -1;
}

Metric MetricField::at(const Point& x) const {
  const int t = locate(x);
  if (t < 0) throw MetricError("point outside the metric field support");
  Eigen::Vector3d b = barycentric(mesh_->corners(t), x).cwiseMax(0.0);
  b /= b.sum();
  const auto& tri = mesh_->triangles()[t];
  Metric l{0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    l.m11 += b[k] * logs_[tri[k]].m11;
    l.m12 += b[k] * logs_[tri[k]].m12;
    l.m22 += b[k] * logs_[tri[k]].m22;
  }
  return metric_exp(l);
}

double riemannian_edge_length(const MetricField& field, const Point& x1, const Point& x2) {
  const Point e = x2 - x1;
  double len = 0.0;
  for (int q = 0; q < 5; ++q) {
    len += kGl5Weights[q] * std::sqrt(field.at(x1 + kGl5Nodes[q] * e).quad(e));
  }
  return len;
}

double riemannian_edge_length(const Metric& log_m1, const Metric& log_m2, const Point& x1, const Point& x2) {
  const Point e = x2 - x1;
  double len = 0.0;
  for (int q = 0; q < 5; ++q) {
    const double t = kGl5Nodes[q];
    const Metric l{(1 - t) * log_m1.m11 + t * log_m2.m11, (1 - t) * log_m1.m12 + t * log_m2.m12,
                   (1 - t) * log_m1.m22 + t * log_m2.m22};
    len += kGl5Weights[q] * std::sqrt(metric_exp(l).quad(e));
  }
  return len;
}

MetricField vertex_metric_from_elements(const Triangulation& mesh, std::span<const Metric> element_metrics) {
  if (static_cast<int>(element_metrics.size()) != mesh.num_triangles()) {
    throw MetricError("one metric per element is required");
  }
  std::vector<Metric> sums(mesh.num_vertices(), Metric{0, 0, 0});
  std::vector<double> weights(mesh.num_vertices(), 0.0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!element_metrics[t].is_spd()) throw MetricError("element metric is not SPD");
    const Metric l = metric_log(element_metrics[t]);
    const double w = mesh.area(t);
    for (int v : mesh.triangles()[t]) {
      sums[v].m11 += w * l.m11;
      sums[v].m12 += w * l.m12;
      sums[v].m22 += w * l.m22;
      weights[v] += w;
    }
  }
  std::vector<Metric> out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (weights[v] <= 0.0) throw MetricError("vertex " + std::to_string(v) + " is not touched by any element");
    out[v] = metric_exp(Metric{sums[v].m11 / weights[v], sums[v].m12 / weights[v], sums[v].m22 / weights[v]});
  }
  return MetricField(mesh, std::move(out));
}

void write_metric(const MetricField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MetricError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "MeshVersionFormatted 2\n\nDimension 2\n\nSolAtVertices\n" << field.vertex_metrics().size() << "\n1 3\n";
  for (const auto& m : field.vertex_metrics()) out << m.m11 << " " << m.m12 << " " << m.m22 << "\n";
  out << "\nEnd\n";
}

std::vector<Metric> read_metric(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetricError("cannot open " + path.string());
  std::string tok;
  std::vector<Metric> out;
  while (in >> tok) {
    if (tok == "MeshVersionFormatted" || tok == "Dimension") {
      int v;
      in >> v;
    } else if (tok == "SolAtVertices") {
      int n = 0, nfields = 0, type = 0;
      if (!(in >> n >> nfields >> type) || nfields != 1 || type != 3) {
        throw MetricError(path.string() + ": expected one symmetric tensor field");
      }
      out.resize(n);
      for (auto& m : out) {
        if (!(in >> m.m11 >> m.m12 >> m.m22)) throw MetricError(path.string() + ": truncated tensor data");
      }
    } else if (tok == "End") {
      return out;
    } else {
      throw MetricError(path.string() + ": unknown section '" + tok + "'");
    }
  }
  throw MetricError(path.string() + ": missing End");
}

}  // namespace dpg
