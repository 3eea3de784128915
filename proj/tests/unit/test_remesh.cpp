#include "doctest.h"

#include <filesystem>
#include <map>

#include "dpg/continuous_model.hpp"
#include "dpg/remesh.hpp"

using namespace dpg;

namespace {

MetricField uniform_field(const Triangulation& mesh, double density) {
  return MetricField(mesh, std::vector<Metric>(mesh.num_vertices(), Metric{density, 0.0, density}));
}

std::map<int, double> boundary_lengths(const Triangulation& m) {
  std::map<int, double> out;
  for (const auto& e : m.edges())
    if (e.is_boundary()) out[e.tag] += e.length;
  return out;
}

void check_valid(const Triangulation& in, const Triangulation& out) {
  for (int t = 0; t < out.num_triangles(); ++t) CHECK(out.area(t) > 0.0);
  CHECK(out.total_area() == doctest::Approx(in.total_area()).epsilon(1e-12));
  const auto a = boundary_lengths(in), b = boundary_lengths(out);
  REQUIRE(a.size() == b.size());
  for (const auto& [tag, len] : a) CHECK(b.at(tag) == doctest::Approx(len).epsilon(1e-12));
}

double in_band_fraction(const Triangulation& mesh, const MetricField& field, const RemeshConfig& cfg) {
  const auto len = edge_metric_lengths(mesh, field);
  int ok = 0;
  for (double l : len) ok += (l >= 0.8 * cfg.length_low && l <= 1.25 * cfg.length_high);
  return static_cast<double>(ok) / len.size();
}

}  // namespace

TEST_CASE("metric lengths of a matching uniform field are close to one") {
  const Triangulation mesh = structured_rectangle(8, 8);
  // 128 elements on the unit square: element density alpha * 128.
  const auto len = edge_metric_lengths(mesh, uniform_field(mesh, kUnitAlpha * 128.0));
  for (double l : len) {
    CHECK(l > 0.7);
    CHECK(l < 1.5);
  }
}

TEST_CASE("matching uniform metric leaves the element count nearly unchanged") {
  const Triangulation mesh = structured_rectangle(8, 8);
  const auto field = uniform_field(mesh, kUnitAlpha * 128.0);
  RemeshStats stats;
  const Triangulation out = remesh(mesh, field, {}, &stats);
  CHECK(out.num_triangles() >= 0.8 * 128);
  CHECK(out.num_triangles() <= 1.2 * 128);
  check_valid(mesh, out);
  CHECK(stats.passes >= 1);
}

TEST_CASE("halving the target size quadruples the element count") {
  const Triangulation mesh = structured_rectangle(8, 8);
  const double d = kUnitAlpha * 128.0;
  const Triangulation a = remesh(mesh, uniform_field(mesh, d));
  const Triangulation b = remesh(mesh, uniform_field(mesh, 4.0 * d));
  // Area-counting oracle: N_e = integral of d / alpha.
  CHECK(b.num_triangles() >= 0.7 * 4.0 * 128);
  CHECK(b.num_triangles() <= 1.3 * 4.0 * 128);
  CHECK(static_cast<double>(b.num_triangles()) / a.num_triangles() == doctest::Approx(4.0).epsilon(0.3));
  check_valid(mesh, b);
}

TEST_CASE("anisotropic field: valid output with most edges in band") {
  const Triangulation mesh = structured_rectangle(8, 8);
  // Strong refinement across x near x = 1.
  std::vector<Metric> vm;
  for (const auto& p : mesh.vertices()) {
    const double h1 = 0.01 + 0.2 * (1.0 - p.x());
    vm.push_back(Metric{1.0 / (h1 * h1), 0.0, 1.0 / (0.1 * 0.1)});
  }
  const MetricField field(mesh, vm);
  RemeshConfig cfg;
  const Triangulation out = remesh(mesh, field, cfg);
  check_valid(mesh, out);
  CHECK(in_band_fraction(out, field, cfg) >= 0.9);
  double max_aspect = 0.0;
  for (int t = 0; t < out.num_triangles(); ++t) {
    const auto c = out.corners(t);
    max_aspect = std::max(max_aspect, metric_decompose(implied_metric(c[0], c[1], c[2])).aspect_ratio);
  }
  CHECK(max_aspect > 3.0);
}

TEST_CASE("L-shaped domain keeps its re-entrant corner") {
  const Triangulation mesh = structured_lshape(3);
  const Triangulation out = remesh(mesh, uniform_field(mesh, kUnitAlpha * 200.0 / 3.0));
  check_valid(mesh, out);
  bool corner = false;
  for (const auto& v : out.vertices()) corner = corner || v.norm() < 1e-14;
  CHECK(corner);
}

TEST_CASE("remesh configuration is validated") {
  const Triangulation mesh = structured_rectangle(2, 2);
  RemeshConfig cfg;
  cfg.length_low = 1.5;
  CHECK_THROWS_AS(remesh(mesh, uniform_field(mesh, 10.0), cfg), RemeshError);
  cfg = {};
  cfg.max_passes = 0;
  CHECK_THROWS_AS(remesh(mesh, uniform_field(mesh, 10.0), cfg), RemeshError);
}

TEST_CASE("remeshing is deterministic") {
  const Triangulation mesh = structured_rectangle(6, 6);
  std::vector<Metric> vm;
  for (const auto& p : mesh.vertices()) vm.push_back(Metric{400.0 * (1.0 + 5.0 * p.x()), 30.0 * p.y(), 300.0});
  const MetricField field(mesh, vm);
  const Triangulation a = remesh(mesh, field), b = remesh(mesh, field);
  REQUIRE(a.num_vertices() == b.num_vertices());
  CHECK(a.triangles() == b.triangles());
  for (int v = 0; v < a.num_vertices(); ++v) CHECK((a.vertex(v) - b.vertex(v)).norm() == 0.0);
}

TEST_CASE("external exchange round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "dpg_unit" / "exchange";
  std::filesystem::remove_all(dir);
  const Triangulation mesh = structured_lshape(2);
  export_external(mesh, uniform_field(mesh, 5.0), dir);
  CHECK(std::filesystem::exists(dir / "input.mesh"));
  CHECK(std::filesystem::exists(dir / "input.sol"));
  const Triangulation back = import_external(dir);
  REQUIRE(back.num_vertices() == mesh.num_vertices());
  CHECK(back.triangles() == mesh.triangles());
  for (int v = 0; v < mesh.num_vertices(); ++v) CHECK((back.vertex(v) - mesh.vertex(v)).norm() == 0.0);
  CHECK(read_metric(dir / "input.sol").size() == static_cast<std::size_t>(mesh.num_vertices()));
}
