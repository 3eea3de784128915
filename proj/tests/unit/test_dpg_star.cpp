#include "doctest.h"

#include "dpg/cases.hpp"
#include "dpg/dpg_star.hpp"
#include "dpg/quadrature.hpp"

using namespace dpg;

namespace {

// L2 projection of (tau_x, tau_y, v) onto the test basis of every element.
std::vector<Eigen::VectorXd> project_test(const Triangulation& mesh, const std::vector<ElementBasis>& bases,
                                          const std::function<Eigen::Vector3d(const Point&)>& f) {
  std::vector<Eigen::VectorXd> out;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& b = bases[t];
    const int n = b.size();
    const auto rule = triangle_rule(mesh.corners(t), 2 * b.degree() + 2);
    const Eigen::MatrixXd v = b.values(rule.points);
    Eigen::MatrixXd fv(rule.size(), 3);
    for (int q = 0; q < rule.size(); ++q) fv.row(q) = f(rule.points.col(q)).transpose();
    const Eigen::MatrixXd c = v.transpose() * rule.weights.asDiagonal() * fv;
    Eigen::VectorXd z(3 * n);
    z << c.col(0), c.col(1), c.col(2);
    out.push_back(z);
  }
  return out;
}

struct Setup {
  TestCase tc;
  Triangulation mesh;
  SpaceSpec space;
  DofLayout layout;
  std::vector<LocalSystem> locals;
  DpgSolver solver;
  Eigen::VectorXd x;

  Setup(const std::string& name, Triangulation m, int p)
      : tc(make_case(name)),
        mesh(std::move(m)),
        space{p, 2, TestNorm::scaled},
        layout(mesh, space),
        locals(build_local_systems(mesh, layout, tc.problem, space)),
        solver(locals, layout),
        x(solver.solve_primal()) {}
};

}  // namespace

TEST_CASE("zero target gives a zero dual") {
  Setup s("boundary_layer", structured_rectangle(3, 3), 1);
  const auto target = TargetFunctional::volume([](const Point&) { return 0.0; });
  const Eigen::VectorXd jv = target_vector(s.mesh, s.layout, s.space, target);
  CHECK(jv.cwiseAbs().maxCoeff() == 0.0);
  const auto dual = solve_dual(s.solver, s.locals, jv);
  CHECK(dual.xi.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& z : dual.z) CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("target functional validation") {
  TargetFunctional t;
  CHECK_THROWS(t.validate());
  CHECK_THROWS(TargetFunctional::flux({}).validate());
  CHECK(TargetFunctional::flux({{2, 1.5}}).dual_boundary_value(2) == -1.5);
  CHECK(TargetFunctional::flux({{2, 1.5}}).dual_boundary_value(1) == 0.0);
}

TEST_CASE("DWR with the discrete dual vanishes (Galerkin orthogonality)") {
  Setup s("reverse_layer", structured_rectangle(4, 4), 2);
  const Eigen::VectorXd jv = target_vector(s.mesh, s.layout, s.space, *s.tc.target);
  const auto dual = solve_dual(s.solver, s.locals, jv);
  double scale = 0.0;
  for (std::size_t t = 0; t < s.locals.size(); ++t)
    scale += std::abs((s.locals[t].B * gather(s.locals[t], s.x) - s.locals[t].l).dot(dual.z[t]));
  CHECK(dwr_estimate(s.locals, s.x, dual.z) <= 1e-10 * std::max(scale, 1e-300));
}

TEST_CASE("DWR vanishes for a representable primal solution") {
  CaseParameters params;
  params.poly_degree = 2;
  TestCase tc = make_case("polynomial", params);
  const Triangulation mesh = structured_rectangle(3, 3);
  SpaceSpec space;
  space.order = 2;
  const DofLayout layout(mesh, space);
  const auto locals = build_local_systems(mesh, layout, tc.problem, space);
  DpgSolver solver(locals, layout);
  const Eigen::VectorXd x = solver.solve_primal();
  const auto target = TargetFunctional::volume([](const Point& p) { return std::sin(p.x()) + p.y(); });
  const auto dual = solve_dual(solver, locals, target_vector(mesh, layout, space, target));
  const auto bases = test_bases(mesh, space);
  CHECK(dwr_estimate(locals, x, patch_reconstruct(mesh, bases, space, dual.z)) < 1e-10);
}

TEST_CASE("patch reconstruction reproduces polynomials") {
  const Triangulation mesh = structured_lshape(2);
  SpaceSpec space;
  space.order = 1;
  const auto bases = test_bases(mesh, space);
  SUBCASE("constant") {
    const auto z = project_test(mesh, bases, [](const Point&) { return Eigen::Vector3d(1.0, -2.0, 0.5); });
    const auto r = patch_reconstruct(mesh, bases, space, z);
    for (std::size_t t = 0; t < z.size(); ++t) CHECK((r[t] - z[t]).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("global polynomial of the test degree") {
    const auto f = [](const Point& p) {
      const double x = p.x(), y = p.y();
      return Eigen::Vector3d(x * x * y - y * y * y, 0.3 * x * y * y + x, x * x * x - 2.0 * x * y + 1.0);
    };
    const auto z = project_test(mesh, bases, f);
    const auto r = patch_reconstruct(mesh, bases, space, z);
    for (std::size_t t = 0; t < z.size(); ++t) CHECK((r[t] - z[t]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("dual indicator vanishes for a smooth exact dual pair") {
  // v vanishes on the unit-square boundary, tau = -eps grad v and
  // j = div tau - beta . grad v, so every volume and jump term is zero.
  const double eps = 0.1;
  ProblemSpec prob;
  prob.epsilon = eps;
  prob.beta = Point(1.0, 0.5);
  prob.pure_diffusion = false;
  const auto v = [](const Point& p) { return p.x() * (1 - p.x()) * p.y() * (1 - p.y()); };
  const auto grad = [](const Point& p) -> Point {
    const double x = p.x(), y = p.y();
    return {(1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)};
  };
  const auto lap = [](const Point& p) { return -2.0 * p.y() * (1 - p.y()) - 2.0 * p.x() * (1 - p.x()); };
  const auto target = TargetFunctional::volume(
      [&](const Point& p) { return -eps * lap(p) - prob.beta.dot(grad(p)); });
  const Triangulation mesh = structured_rectangle(3, 3);
  SpaceSpec space;
  space.order = 2;
  const auto bases = test_bases(mesh, space);
  const auto z = project_test(mesh, bases, [&](const Point& p) {
    const Point g = grad(p);
    return Eigen::Vector3d(-eps * g.x(), -eps * g.y(), v(p));
  });
  const auto es = eta_star(mesh, bases, space, prob, z, target);
  for (double e : es) CHECK(e < 1e-10);
}

TEST_CASE("goal indicator") {
  const std::vector<double> eta{0.1, 0.0, 2.0};
  CHECK(goal_indicator(eta, std::vector<double>(3, 1.0)) == eta);
  for (double g : goal_indicator(std::vector<double>(3, 0.0), eta)) CHECK(g == 0.0);
  CHECK(goal_indicator(eta, std::vector<double>{2.0, 5.0, 0.5}) == std::vector<double>{0.2, 0.0, 1.0});
}

TEST_CASE("computed target converges to the exact value") {
  double previous = std::numeric_limits<double>::infinity();
  for (int n : {4, 8, 16}) {
    Setup s("reverse_layer", structured_rectangle(n, n), 2);
    const Eigen::VectorXd jv = target_vector(s.mesh, s.layout, s.space, *s.tc.target);
    const double err = std::abs(s.tc.exact_target - jv.dot(s.x));
    CHECK(err < previous);
    previous = err;
  }
}
