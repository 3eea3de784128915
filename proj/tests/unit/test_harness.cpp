#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dpg/adapt.hpp"
#include "dpg/config.hpp"
#include "dpg/quadrature.hpp"
#include "dpg/report.hpp"

using namespace dpg;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "dpg_unit" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Random points inside the case domain, at least `margin` from its boundary.
std::vector<Point> sample(const std::string& name, int n, double margin, std::mt19937& rng) {
  const bool lshape = name == "lshape";
  std::uniform_real_distribution<double> u(lshape ? -1.0 + margin : margin, 1.0 - margin);
  std::vector<Point> out;
  while (static_cast<int>(out.size()) < n) {
    const Point p(u(rng), u(rng));
    if (lshape && p.x() > -margin && p.y() < margin) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("manufactured sources match a finite-difference residual") {
  std::mt19937 rng(21);
  for (const auto& name : case_names()) {
    const TestCase tc = make_case(name);
    REQUIRE(tc.exact_u);
    const auto& u = tc.exact_u;
    const double eps = tc.problem.epsilon;
    const Point beta = tc.problem.beta;
    // Operator -eps lap u + beta . grad u by central differences of step h.
    const auto apply = [&](const Point& x, double h) {
      const Point ex(h, 0.0), ey(0.0, h);
      const double lap = (u(x + ex) + u(x - ex) + u(x + ey) + u(x - ey) - 4.0 * u(x)) / (h * h);
      const Point grad((u(x + ex) - u(x - ex)) / (2 * h), (u(x + ey) - u(x - ey)) / (2 * h));
      return std::pair{-eps * lap + beta.dot(grad), std::abs(eps * lap) + std::abs(beta.dot(grad))};
    };
    int checked = 0;
    for (const Point& x : sample(name, 1000, 1e-3, rng)) {
      if (name == "line_singularity" && std::abs(x.x() - 0.5 * x.y() - 0.5) < 1e-3) continue;
      if (name == "lshape" && x.norm() < 1e-2) continue;
      const auto [coarse, size] = apply(x, 4e-4);
      const auto [fine, unused] = apply(x, 2e-4);
      // Richardson extrapolation; the coarse/fine gap bounds the remaining difference error.
      const double op = (4.0 * fine - coarse) / 3.0;
      const double s = tc.problem.source(x);
      const double scale = 1.0 + size + std::abs(s);
      CHECK_MESSAGE(std::abs(op - s) <= 1e-6 * scale + std::abs(fine - coarse), name);
      ++checked;
    }
    CHECK(checked > 900);
  }
}

TEST_CASE("exact targets agree with an independent quadrature") {
  SUBCASE("volume targets") {
    for (const char* name : {"reverse_layer", "gaussian_peak"}) {
      const TestCase tc = make_case(name);
      // Composite tensor Gauss-Legendre with a mesh graded towards the layers at x = 1 and y = 1.
      const auto gl = gauss_jacobi(20);
      std::vector<double> nodes, weights;
      std::vector<double> breaks{0.0};
      for (double b : {0.5, 0.8, 0.9, 0.95, 0.97, 0.98, 0.99, 0.995, 0.998, 0.999, 1.0}) breaks.push_back(b);
      for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k], b = breaks[k + 1];
        for (int q = 0; q < gl.size(); ++q) {
          nodes.push_back(a + 0.5 * (b - a) * (gl.points(0, q) + 1.0));
          weights.push_back(0.5 * (b - a) * gl.weights[q]);
        }
      }
      double v = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = 0; j < nodes.size(); ++j) {
          const Point p(nodes[i], nodes[j]);
          v += weights[i] * weights[j] * tc.target->j_omega(p) * tc.exact_u(p);
        }
      CHECK_MESSAGE(tc.exact_target == doctest::Approx(v).epsilon(1e-8), name);
    }
  }
  SUBCASE("flux target") {
    const TestCase tc = make_case("arctan_flux");
    const int n = 20000;
    double v = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double y = static_cast<double>(k) / n;
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      v += w * tc.exact_sigma(Point(1.0, y)).x();
    }
    v /= 3.0 * n;
    CHECK(tc.exact_target == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("rate fit") {
  for (int p = 1; p <= 3; ++p) {
    std::vector<int> ndof;
    std::vector<double> err;
    for (int k = 0; k < 8; ++k) {
      ndof.push_back(100 * (1 << k));
      err.push_back(3.7 * std::pow(ndof.back(), -0.5 * (p + 1)));
    }
    const auto fit = rate_fit(ndof, err, 5);
    CHECK(fit.slope == doctest::Approx(-(p + 1)).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS(rate_fit({1, 2, 3}, {1.0, 0.0, 1.0}, 3));
  CHECK_THROWS(rate_fit({1, 2}, {1.0, 1.0}, 3));
  CHECK_THROWS(rate_fit({1, 2, 3}, {1.0, 1.0}, 2));
}

TEST_CASE("grading fit on a radially graded point set") {
  // Uniform mesh: the element size does not depend on r.
  const Triangulation m = structured_lshape(4);
  CHECK(std::abs(grading_fit(m, Point(0, 0)).slope) < 0.1);
  const Triangulation one({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}}, {{{0, 1}, 1}, {{1, 2}, 1}, {{2, 0}, 1}});
  CHECK_THROWS(grading_fit(one, Point(0, 0)));
}

TEST_CASE("study CSV") {
  StudyRecord empty;
  CHECK(study_csv(empty) == "cycle,N_e,ndof,L2_u,L2_sigma,energy,E_star,J_error,DWR,h_min,cond\n");
  StudyRecord r;
  CycleRecord row;
  row.cycle = 2;
  row.elements = 40;
  row.ndof = 600;
  row.l2_u = 0.5;
  row.energy = 0.25;
  r.rows.push_back(row);
  CHECK(study_csv(r) == "cycle,N_e,ndof,L2_u,L2_sigma,energy,E_star,J_error,DWR,h_min,cond\n2,40,600,0.5,,0.25,,,,,\n");
  CHECK(column(r, "energy") == std::vector<double>{0.25});
  CHECK_THROWS(column(r, "nope"));
  const auto dir = temp_dir("csv");
  write_study_csv(dir / "s.csv", r);
  std::ifstream in(dir / "s.csv");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == study_csv(r));
  CHECK_THROWS(write_study_csv(dir / "missing" / "s.csv", r));
}

TEST_CASE("VTK output parses back") {
  const TestCase tc = make_case("sine");
  const Triangulation mesh = structured_rectangle(3, 3);
  SpaceSpec space;
  const DofLayout layout(mesh, space);
  const auto locals = build_local_systems(mesh, layout, tc.problem, space);
  const Eigen::VectorXd x = solve_primal(locals, layout);
  const FieldEvaluator f(mesh, space, layout, x);
  CellFields cells;
  cells.eta = error_representation(locals, x).eta;
  cells.beta.assign(mesh.num_triangles(), 1.0);
  const auto dir = temp_dir("vtk");
  write_vtk(dir / "a.vtk", mesh, &f, cells);
  const auto s = parse_vtk(dir / "a.vtk");
  CHECK(s.version == "4.2");
  CHECK(s.points == 3 * mesh.num_triangles());
  CHECK(s.cells == mesh.num_triangles());
  CHECK(s.point_arrays == std::vector<std::string>{"u"});
  CHECK(s.cell_arrays == std::vector<std::string>{"eta", "beta_M"});

  std::ofstream(dir / "bad.vtk") << "# vtk DataFile Version 4.2\nx\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 3 double\n0 0 0\n";
  CHECK_THROWS(parse_vtk(dir / "bad.vtk"));
}

TEST_CASE("configuration files") {
  std::istringstream in(
      "# comment\ncase = lshape\n p = 3 \ncycles=4 # trailing\nnorm = standard\nregularize = false\n\nrho_max = 50\n");
  AdaptConfig cfg;
  parse_config(in, cfg);
  CHECK(cfg.case_name == "lshape");
  CHECK(cfg.space.order == 3);
  CHECK(cfg.cycles == 4);
  CHECK(cfg.space.norm == TestNorm::standard);
  CHECK_FALSE(cfg.regularize);
  CHECK(cfg.anisotropy.rho_max == 50.0);

  // Every key survives a text round trip.
  AdaptConfig again;
  std::istringstream text(config_text(cfg));
  parse_config(text, again);
  CHECK(config_text(again) == config_text(cfg));
  CHECK(config_keys().size() > 30);

  AdaptConfig c;
  CHECK_THROWS_AS(set_config_value(c, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "p", "two"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "growth", "1.3x"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "regularize", "maybe"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "mode", "fast"), ConfigError);
  std::istringstream bad("p = 2\njunk line\n");
  CHECK_THROWS_WITH_AS(parse_config(bad, c), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dpg.cfg"), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(SolverError("x")) == 3);
  CHECK(exit_code_for(AssemblyError("x")) == 3);
  CHECK(exit_code_for(RemeshError("x")) == 4);
  CHECK(exit_code_for(std::invalid_argument("x")) == 2);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("initial meshes") {
  const TestCase sq = make_case("sine");
  CHECK(initial_mesh(sq, 32).num_triangles() == 32);
  CHECK(initial_mesh(sq, 100).num_triangles() == 128);
  CHECK(initial_mesh(sq, 512).num_triangles() == 512);
  CHECK(initial_mesh(make_case("lshape"), 32).num_triangles() == 24);
}

TEST_CASE("adaptation loop") {
  AdaptConfig cfg;
  cfg.cycles = 2;
  SUBCASE("polynomial solution is exact on every cycle") {
    cfg.case_name = "polynomial";
    cfg.params.poly_degree = 2;
    cfg.space.order = 2;
    const auto r = adapt_loop(cfg);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) {
      CHECK(row.energy < 1e-9);
      CHECK(row.l2_u < 1e-9);
    }
  }
  SUBCASE("identical configurations give identical records") {
    cfg.case_name = "sine";
    cfg.out = temp_dir("repro_a");
    const auto a = adapt_loop(cfg);
    cfg.out = temp_dir("repro_b");
    const auto b = adapt_loop(cfg);
    CHECK(study_csv(a) == study_csv(b));
    std::ifstream fa(temp_dir("unused").parent_path() / "repro_a" / "study.csv");
    std::stringstream ta;
    ta << fa.rdbuf();
    CHECK(ta.str() == study_csv(a));
    CHECK(std::filesystem::exists(cfg.out / "cycle_0.vtk"));
    CHECK(std::filesystem::exists(cfg.out / "plan_0.csv"));
    CHECK(std::filesystem::exists(cfg.out / "mesh_2.mesh"));
  }
  SUBCASE("goal mode needs a target") {
    cfg.case_name = "sine";
    cfg.mode = AdaptMode::goal;
    CHECK_THROWS_AS(adapt_loop(cfg), ConfigError);
  }
  SUBCASE("unknown case") {
    cfg.case_name = "nope";
    CHECK_THROWS_AS(adapt_loop(cfg), ConfigError);
  }
}
