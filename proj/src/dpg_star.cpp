#include "dpg/dpg_star.hpp"

#include <algorithm>
#include <cmath>

#include "dpg/quadrature.hpp"

namespace dpg {

TargetFunctional TargetFunctional::volume(ScalarFunction j) {
  TargetFunctional t;
  t.kind = Kind::volume_weighted;
  t.j_omega = std::move(j);
  return t;
}

TargetFunctional TargetFunctional::flux(std::map<int, double> weights) {
  TargetFunctional t;
  t.kind = Kind::boundary_flux;
  t.flux_weights = std::move(weights);
  return t;
}

void TargetFunctional::validate() const {
  if (kind == Kind::volume_weighted && (!j_omega || !flux_weights.empty())) {
    throw std::invalid_argument("volume target needs j_omega and no flux weights");
  }
  if (kind == Kind::boundary_flux && (j_omega || flux_weights.empty())) {
    throw std::invalid_argument("flux target needs boundary weights and no volume weight");
  }
}

double TargetFunctional::dual_boundary_value(int tag) const {
  if (kind != Kind::boundary_flux) return 0.0;
  const auto it = flux_weights.find(tag);
  // J(sigma-hat) enters with the opposite sign of the -<sigma-hat, [v]> term.
  return it == flux_weights.end() ? 0.0 : -it->second;
}

Eigen::VectorXd target_vector(const Triangulation& mesh, const DofLayout& layout, const SpaceSpec& space,
                              const TargetFunctional& target) {
  target.validate();
  Eigen::VectorXd j = Eigen::VectorXd::Zero(layout.num_dofs());
  const int np = space.trial_size();
  if (target.kind == TargetFunctional::Kind::volume_weighted) {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto c = mesh.corners(t);
      const ElementBasis basis(c, space.order);
      const QuadratureRule rule = triangle_rule(c, volume_quad_degree(space));
      Eigen::VectorXd w(rule.size());
      for (int q = 0; q < rule.size(); ++q) w(q) = rule.weights(q) * target.j_omega(rule.points.col(q));
      j.segment(layout.u_offset(t), np) = basis.values(rule.points).transpose() * w;
    }
    return j;
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    if (!edge.is_boundary()) continue;
    const auto it = target.flux_weights.find(edge.tag);
    if (it == target.flux_weights.end()) continue;
    const int sgn = mesh.edge_sign(edge.tri[0], edge.local[0]);
    const EdgeRule rule = edge_rule(mesh.vertex(edge.v[0]), mesh.vertex(edge.v[1]), edge_quad_degree(space));
    const Eigen::MatrixXd psi = edge_basis_values(rule.params, space.order, edge.length);
    j.segment(layout.flux_offset(e), space.trace_size()) = (it->second * sgn) * (psi.transpose() * rule.weights);
  }
  return j;
}

DualSolution solve_dual(DpgSolver& solver, const std::vector<LocalSystem>& locals, const Eigen::VectorXd& target) {
  DualSolution d;
  d.xi = solver.solve(target);
  d.z.reserve(locals.size());
  for (std::size_t t = 0; t < locals.size(); ++t) {
    const auto& s = locals[t];
    Eigen::LLT<Eigen::MatrixXd> llt(s.G);
    if (llt.info() != Eigen::Success) throw SolverError("Gram matrix of element " + std::to_string(t) + " is not SPD");
    d.z.push_back(llt.solve(s.B * gather(s, d.xi)));
  }
  return d;
}

std::vector<ElementBasis> test_bases(const Triangulation& mesh, const SpaceSpec& space) {
  std::vector<ElementBasis> out;
  out.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) out.emplace_back(mesh.corners(t), space.test_order());
  return out;
}

Eigen::MatrixXd eval_test_field(const ElementBasis& basis, const Eigen::VectorXd& coeffs,
                                const Eigen::MatrixXd& points) {
  const int nt = basis.size();
  const Eigen::MatrixXd v = basis.values(points);
  Eigen::MatrixXd out(3, points.cols());
  for (int c = 0; c < 3; ++c) out.row(c) = (v * coeffs.segment(c * nt, nt)).transpose();
  return out;
}

std::vector<double> eta_star(const Triangulation& mesh, const std::vector<ElementBasis>& bases,
                             const SpaceSpec& space, const ProblemSpec& problem,
                             const std::vector<Eigen::VectorXd>& z, const TargetFunctional& target) {
  const int nt = space.test_size();
  const int nk = mesh.num_triangles();
  std::vector<double> out(nk, 0.0);
  const double inv_eps = 1.0 / problem.epsilon;
  const bool volume = target.kind == TargetFunctional::Kind::volume_weighted;

  for (int t = 0; t < nk; ++t) {
    const ElementBasis& b = bases[t];
    const Eigen::VectorXd& zt = z[t];
    double sum = 0.0;

    const QuadratureRule rule = triangle_rule(mesh.corners(t), volume_quad_degree(space));
    const Eigen::MatrixXd val = b.values(rule.points);
    Eigen::MatrixXd dx, dy;
    b.gradients(rule.points, dx, dy);
    const Eigen::VectorXd tx = val * zt.segment(0, nt);
    const Eigen::VectorXd ty = val * zt.segment(nt, nt);
    const Eigen::VectorXd vx = dx * zt.segment(2 * nt, nt);
    const Eigen::VectorXd vy = dy * zt.segment(2 * nt, nt);
    const Eigen::VectorXd div = dx * zt.segment(0, nt) + dy * zt.segment(nt, nt);
    for (int q = 0; q < rule.size(); ++q) {
      const double r1 = inv_eps * tx(q) + vx(q);
      const double r2 = inv_eps * ty(q) + vy(q);
      double r3 = div(q) - problem.beta.x() * vx(q) - problem.beta.y() * vy(q);
      if (volume) r3 -= target.j_omega(rule.points.col(q));
      sum += rule.weights(q) * (r1 * r1 + r2 * r2 + r3 * r3);
    }

    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edge(t, k);
      const Edge& edge = mesh.edges()[e];
      const Point n = mesh.edge_sign(t, k) * edge.normal;
      const EdgeRule er = edge_rule(mesh.vertex(edge.v[0]), mesh.vertex(edge.v[1]), edge_quad_degree(space));
      const Eigen::MatrixXd own = eval_test_field(b, zt, er.points);
      Eigen::VectorXd jump_v(er.size()), jump_tn(er.size());
      if (edge.is_boundary()) {
        jump_v = own.row(2).transpose().array() - target.dual_boundary_value(edge.tag);
        jump_tn.setZero();
      } else {
        const int other = edge.tri[0] == t ? edge.tri[1] : edge.tri[0];
        const Eigen::MatrixXd nb = eval_test_field(bases[other], z[other], er.points);
        jump_v = (own.row(2) - nb.row(2)).transpose();
        jump_tn = (n.x() * (own.row(0) - nb.row(0)) + n.y() * (own.row(1) - nb.row(1))).transpose();
      }
      const double h = edge.length;
      sum += h * er.weights.dot(jump_tn.cwiseAbs2()) + er.weights.dot(jump_v.cwiseAbs2()) / h;
    }
    out[t] = std::sqrt(sum);
  }
  return out;
}

namespace {

// Degree-q least-squares fit of the three components of z over `patch`, in
// monomials of (x - c)/h. Returns false when the sample matrix is rank deficient.
bool fit_patch(const Triangulation& mesh, const std::vector<ElementBasis>& bases, const std::vector<Eigen::VectorXd>& z,
               const std::vector<int>& patch, int degree, const Point& c, double h, Eigen::MatrixXd& coeffs) {
  std::vector<Eigen::MatrixXd> rows_m, rows_f;
  Eigen::Index total = 0;
  for (int s : patch) {
    const QuadratureRule rule = triangle_rule(mesh.corners(s), 2 * degree);
    const Eigen::MatrixXd local = (rule.points.colwise() - c) / h;
    rows_m.push_back(monomial_values(local, degree));
    rows_f.push_back(eval_test_field(bases[s], z[s], rule.points).transpose());
    total += rule.size();
  }
  const int nm = monomial_count(degree);
  if (total < nm) return false;
  Eigen::MatrixXd m(total, nm), f(total, 3);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < rows_m.size(); ++i) {
    m.middleRows(r, rows_m[i].rows()) = rows_m[i];
    f.middleRows(r, rows_f[i].rows()) = rows_f[i];
    r += rows_m[i].rows();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  if (qr.rank() < nm) return false;
  coeffs = qr.solve(f);
  return true;
}

}  // namespace

std::vector<Eigen::VectorXd> patch_reconstruct(const Triangulation& mesh, const std::vector<ElementBasis>& bases,
                                               const SpaceSpec& space, const std::vector<Eigen::VectorXd>& z) {
  const int q = space.test_order();
  const int nt = space.test_size();
  std::vector<Eigen::VectorXd> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    std::vector<int> patch = mesh.edge_neighbors(t);
    if (patch.empty()) throw SolverError("patch reconstruction: element " + std::to_string(t) + " is isolated");
    patch.insert(patch.begin(), t);
    const Point c = mesh.centroid(t);
    const double h = std::sqrt(mesh.area(t));
    Eigen::MatrixXd coeffs;
    if (!fit_patch(mesh, bases, z, patch, q, c, h, coeffs)) {
      std::vector<int> wide = mesh.vertex_neighbors(t);
      wide.insert(wide.begin(), t);
      if (!fit_patch(mesh, bases, z, wide, q, c, h, coeffs)) {
        throw SolverError("patch reconstruction: rank-deficient fit on element " + std::to_string(t));
      }
    }
    // Project the fitted polynomials onto the orthonormal test basis.
    const QuadratureRule rule = triangle_rule(mesh.corners(t), 2 * q);
    const Eigen::MatrixXd fit = monomial_values((rule.points.colwise() - c) / h, q) * coeffs;  // n x 3
    const Eigen::MatrixXd proj = bases[t].values(rule.points).transpose() * rule.weights.asDiagonal() * fit;
    out[t].resize(3 * nt);
    for (int k = 0; k < 3; ++k) out[t].segment(k * nt, nt) = proj.col(k);
  }
  return out;
}

double dwr_estimate(const std::vector<LocalSystem>& locals, const Eigen::VectorXd& x,
                    const std::vector<Eigen::VectorXd>& z) {
  double sum = 0.0;
  for (std::size_t t = 0; t < locals.size(); ++t) {
    const auto& s = locals[t];
    sum += (s.B * gather(s, x) - s.l).dot(z[t]);
  }
  return std::abs(sum);
}

std::vector<double> goal_indicator(const std::vector<double>& eta, const std::vector<double>& eta_star) {
  if (eta.size() != eta_star.size()) throw std::invalid_argument("goal_indicator: length mismatch");
  std::vector<double> out(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) out[i] = eta[i] * eta_star[i];
  return out;
}

}  // namespace dpg
