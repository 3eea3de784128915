#include "dpg/assembly.hpp"

#include <cmath>

#include "dpg/quadrature.hpp"

namespace dpg {

void ProblemSpec::validate() const {
  if (!(epsilon > 0.0)) throw AssemblyError("diffusivity must be positive");
  if (pure_diffusion != beta.isZero(0.0)) throw AssemblyError("pure_diffusion flag disagrees with the advection field");
  if (!source || !dirichlet) throw AssemblyError("source and Dirichlet data must be set");
}

void SpaceSpec::validate() const {
  if (order < 1) throw AssemblyError("trial order must be >= 1");
  if (enrichment < 1) throw AssemblyError("enrichment must be >= 1");
  // Element-wise M >= N against the interior trial unknowns.
  if (test_size() < trial_size()) {
    throw AssemblyError("test space too small for the trial space");
  }
}

DofLayout::DofLayout(const Triangulation& mesh, const SpaceSpec& space)
    : np_(space.trial_size()), ne_(space.trace_size()) {
  num_interior_ = 3 * np_ * mesh.num_triangles();
  int next = num_interior_;
  lambda_.assign(mesh.num_edges(), -1);
  flux_.assign(mesh.num_edges(), -1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edges()[e].is_boundary()) {
      lambda_[e] = next;
      next += ne_;
    }
    flux_[e] = next;
    next += ne_;
  }
  num_dofs_ = next;
}

std::vector<int> DofLayout::element_dofs(const Triangulation& mesh, int t) const {
  std::vector<int> dofs;
  dofs.reserve(3 * np_ + 6 * ne_);
  for (int i = 0; i < 3 * np_; ++i) dofs.push_back(t * 3 * np_ + i);
  for (int k = 0; k < 3; ++k) {
    const int e = mesh.triangle_edge(t, k);
    if (lambda_[e] >= 0)
      for (int i = 0; i < ne_; ++i) dofs.push_back(lambda_[e] + i);
    for (int i = 0; i < ne_; ++i) dofs.push_back(flux_[e] + i);
  }
  return dofs;
}

double test_norm_weight(TestNorm norm, double area) { return norm == TestNorm::scaled ? std::sqrt(area) : 1.0; }

ElementGeometry element_geometry(const Triangulation& mesh, int t, const SpaceSpec& space) {
  const auto c = mesh.corners(t);
  return ElementGeometry{t, c, ElementBasis(c, space.test_order())};
}

Eigen::MatrixXd local_gram(const ElementGeometry& geo, const SpaceSpec& space, int quad_degree) {
  if (quad_degree < 0) quad_degree = volume_quad_degree(space);
  if (quad_degree < 2 * space.test_order()) throw AssemblyError("Gram quadrature degree below 2(p+dp)");
  const int nt = space.test_size();
  const QuadratureRule rule = triangle_rule(geo.corners, quad_degree);
  const Eigen::MatrixXd v = geo.basis.values(rule.points);
  Eigen::MatrixXd dx, dy;
  geo.basis.gradients(rule.points, dx, dy);
  const auto w = rule.weights.asDiagonal();
  const double wg = test_norm_weight(space.norm, geo.basis.area());

  const Eigen::MatrixXd mass = v.transpose() * w * v;
  const Eigen::MatrixXd kxx = dx.transpose() * w * dx;
  const Eigen::MatrixXd kxy = dx.transpose() * w * dy;
  const Eigen::MatrixXd kyy = dy.transpose() * w * dy;

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3 * nt, 3 * nt);
  g.block(0, 0, nt, nt) = mass + wg * kxx;
  g.block(0, nt, nt, nt) = wg * kxy;
  g.block(nt, 0, nt, nt) = wg * kxy.transpose();
  g.block(nt, nt, nt, nt) = mass + wg * kyy;
  g.block(2 * nt, 2 * nt, nt, nt) = mass + wg * (kxx + kyy);
  return 0.5 * (g + g.transpose());
}

StiffnessLoad local_stiffness_load(const Triangulation& mesh, const ElementGeometry& geo, const ProblemSpec& problem,
                                   const SpaceSpec& space) {
  const int t = geo.triangle;
  const int nt = space.test_size();
  const int np = space.trial_size();
  const int ne = space.trace_size();
  const bool convective = !problem.beta.isZero(0.0);

  int ncols = 3 * np;
  for (int k = 0; k < 3; ++k) {
    ncols += (mesh.edges()[mesh.triangle_edge(t, k)].is_boundary() ? 1 : 2) * ne;
  }
  StiffnessLoad out{Eigen::MatrixXd::Zero(3 * nt, ncols), Eigen::VectorXd::Zero(3 * nt)};
  auto& b = out.B;
  auto& l = out.l;

  // Volume terms.
  {
    const QuadratureRule rule = triangle_rule(geo.corners, volume_quad_degree(space));
    const Eigen::MatrixXd v = geo.basis.values(rule.points);
    Eigen::MatrixXd dx, dy;
    geo.basis.gradients(rule.points, dx, dy);
    const Eigen::MatrixXd wp = rule.weights.asDiagonal() * v.leftCols(np);

    const Eigen::MatrixXd mass = v.transpose() * wp;
    const Eigen::MatrixXd gx = dx.transpose() * wp;
    const Eigen::MatrixXd gy = dy.transpose() * wp;
    const double inv_eps = 1.0 / problem.epsilon;

    // tau rows: (1/eps)(sigma, tau) + (u, div tau)
    b.block(0, 0, nt, np) = inv_eps * mass;
    b.block(nt, np, nt, np) = inv_eps * mass;
    b.block(0, 2 * np, nt, np) = gx;
    b.block(nt, 2 * np, nt, np) = gy;
    // v rows: (sigma, grad v) - (beta u, grad v)
    b.block(2 * nt, 0, nt, np) = gx;
    b.block(2 * nt, np, nt, np) = gy;
    if (convective) {
      b.block(2 * nt, 2 * np, nt, np) = -(problem.beta.x() * gx + problem.beta.y() * gy);
    }

    Eigen::VectorXd s(rule.size());
    for (int q = 0; q < rule.size(); ++q) s(q) = problem.source(rule.points.col(q));
    l.segment(2 * nt, nt) = v.transpose() * rule.weights.cwiseProduct(s);
  }

  // Skeleton terms.
  int col = 3 * np;
  for (int k = 0; k < 3; ++k) {
    const int e = mesh.triangle_edge(t, k);
    const Edge& edge = mesh.edges()[e];
    const int sgn = mesh.edge_sign(t, k);
    const Point n_k = sgn * edge.normal;
    const double beta_n = problem.beta.dot(n_k);

    const EdgeRule rule = edge_rule(mesh.vertex(edge.v[0]), mesh.vertex(edge.v[1]), edge_quad_degree(space));
    const Eigen::MatrixXd v = geo.basis.values(rule.points);
    const Eigen::MatrixXd trace = edge_basis_values(rule.params, space.order, edge.length);
    const Eigen::MatrixXd pairing = v.transpose() * rule.weights.asDiagonal() * trace;  // nt x ne

    if (!edge.is_boundary()) {
      // -<lambda, tau.n_K> + <(beta.n_K) lambda, v>
      b.block(0, col, nt, ne) = -n_k.x() * pairing;
      b.block(nt, col, nt, ne) = -n_k.y() * pairing;
      if (convective) b.block(2 * nt, col, nt, ne) = beta_n * pairing;
      col += ne;
    } else {
      Eigen::VectorXd g(rule.size());
      for (int q = 0; q < rule.size(); ++q) g(q) = problem.dirichlet(rule.points.col(q));
      const Eigen::VectorXd vg = v.transpose() * rule.weights.cwiseProduct(g);
      // <g, tau.n_K> - <(beta.n_K) g, v>
      l.segment(0, nt) += n_k.x() * vg;
      l.segment(nt, nt) += n_k.y() * vg;
      if (convective) l.segment(2 * nt, nt) -= beta_n * vg;
    }
    // -<sigma-hat sgn, v>
    b.block(2 * nt, col, nt, ne) = -sgn * pairing;
    col += ne;
  }
  return out;
}

LocalSystem build_local_system(const Triangulation& mesh, const DofLayout& layout, int t, const ProblemSpec& problem,
                               const SpaceSpec& space) {
  const ElementGeometry geo = element_geometry(mesh, t, space);
  StiffnessLoad bl = local_stiffness_load(mesh, geo, problem, space);
  LocalSystem sys;
  sys.B = std::move(bl.B);
  sys.l = std::move(bl.l);
  sys.G = local_gram(geo, space);
  sys.dofs = layout.element_dofs(mesh, t);
  return sys;
}

std::vector<LocalSystem> build_local_systems(const Triangulation& mesh, const DofLayout& layout,
                                             const ProblemSpec& problem, const SpaceSpec& space) {
  problem.validate();
  space.validate();
  std::vector<LocalSystem> out;
  out.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) out.push_back(build_local_system(mesh, layout, t, problem, space));
  return out;
}

}  // namespace dpg
