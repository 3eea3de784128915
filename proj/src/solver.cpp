#include "dpg/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "dpg/quadrature.hpp"

namespace dpg {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Lower Cholesky factor of G_K; reports the element on failure.
Eigen::LLT<Eigen::MatrixXd> factor_gram(const LocalSystem& sys, std::size_t t) {
  Eigen::LLT<Eigen::MatrixXd> llt(sys.G);
  if (llt.info() != Eigen::Success) {
    throw SolverError("Gram matrix of element " + std::to_string(t) + " is not positive definite");
  }
  return llt;
}

// Element contribution K = B^T G^{-1} B and f = B^T G^{-1} l.
void local_normal(const LocalSystem& sys, std::size_t t, Eigen::MatrixXd& k, Eigen::VectorXd& f) {
  const auto llt = factor_gram(sys, t);
  const Eigen::MatrixXd w = llt.matrixL().solve(sys.B);
  const Eigen::VectorXd wl = llt.matrixL().solve(sys.l);
  k.noalias() = w.transpose() * w;
  f.noalias() = w.transpose() * wl;
}

SparseMatrix from_triplets(int rows, int cols, const Triplets& trip) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace

GlobalSystem assemble_normal(const std::vector<LocalSystem>& locals, int num_dofs) {
  Triplets trip;
  std::size_t nnz = 0;
  for (const auto& s : locals) nnz += s.dofs.size() * s.dofs.size();
  trip.reserve(nnz);
  GlobalSystem out{SparseMatrix(num_dofs, num_dofs), Eigen::VectorXd::Zero(num_dofs)};
  Eigen::MatrixXd k;
  Eigen::VectorXd f;
  for (std::size_t t = 0; t < locals.size(); ++t) {
    const auto& s = locals[t];
    local_normal(s, t, k, f);
    const int n = static_cast<int>(s.dofs.size());
    for (int j = 0; j < n; ++j) {
      out.b(s.dofs[j]) += f(j);
      for (int i = 0; i < n; ++i) trip.emplace_back(s.dofs[i], s.dofs[j], k(i, j));
    }
  }
  out.A = from_triplets(num_dofs, num_dofs, trip);
  return out;
}

LeastSquaresSystem assemble_least_squares(const std::vector<LocalSystem>& locals, int num_dofs) {
  int rows = 0;
  for (const auto& s : locals) rows += static_cast<int>(s.B.rows());
  Triplets trip;
  LeastSquaresSystem out{SparseMatrix(rows, num_dofs), Eigen::VectorXd::Zero(rows)};
  int row = 0;
  for (std::size_t t = 0; t < locals.size(); ++t) {
    const auto& s = locals[t];
    const auto llt = factor_gram(s, t);
    const Eigen::MatrixXd w = llt.matrixL().solve(s.B);
    out.b.segment(row, s.l.size()) = llt.matrixL().solve(s.l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        if (w(i, j) != 0.0) trip.emplace_back(row + static_cast<int>(i), s.dofs[j], w(i, j));
    row += static_cast<int>(s.B.rows());
  }
  out.A = from_triplets(rows, num_dofs, trip);
  return out;
}

struct DpgSolver::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool ldlt_ready = false;

  // Static condensation data, per element.
  struct Interior {
    int offset = 0;
    int size = 0;
    Eigen::LLT<Eigen::MatrixXd> kii;
    Eigen::MatrixXd kit;         // interior x trace
    std::vector<int> trace_ids;  // global trace ids, shifted by num_interior
  };
  std::vector<Interior> interiors;
  Eigen::SimplicialLDLT<SparseMatrix> schur;
};

DpgSolver::DpgSolver(const std::vector<LocalSystem>& locals, const DofLayout& layout, SolveOptions options)
    : locals_(&locals),
      num_dofs_(layout.num_dofs()),
      num_interior_(layout.num_interior_dofs()),
      options_(options),
      impl_(std::make_unique<Impl>()) {
  system_ = assemble_normal(locals, num_dofs_);
  if (options_.method == SolverMethod::normal) factor_normal();
}

DpgSolver::~DpgSolver() = default;
DpgSolver::DpgSolver(DpgSolver&&) noexcept = default;
DpgSolver& DpgSolver::operator=(DpgSolver&&) noexcept = default;

void DpgSolver::factor_normal() {
  if (!options_.static_condensation) {
    impl_->ldlt.compute(system_.A);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverError("normal-equation factorization failed");
    impl_->ldlt_ready = true;
    return;
  }
  const int nskel = num_dofs_ - num_interior_;
  Triplets trip;
  impl_->interiors.clear();
  impl_->interiors.reserve(locals_->size());
  Eigen::MatrixXd k;
  Eigen::VectorXd f;
  for (std::size_t t = 0; t < locals_->size(); ++t) {
    const auto& s = (*locals_)[t];
    local_normal(s, t, k, f);
    const int n = static_cast<int>(s.dofs.size());
    // Interior unknowns lead the local ordering.
    int ni = 0;
    while (ni < n && s.dofs[ni] < num_interior_) ++ni;
    const int nt = n - ni;
    Impl::Interior in;
    in.offset = s.dofs[0];
    in.size = ni;
    in.kii.compute(k.topLeftCorner(ni, ni));
    if (in.kii.info() != Eigen::Success) {
      throw SolverError("interior block of element " + std::to_string(t) + " is singular");
    }
    in.kit = k.topRightCorner(ni, nt);
    for (int j = ni; j < n; ++j) in.trace_ids.push_back(s.dofs[j] - num_interior_);
    const Eigen::MatrixXd s_loc = k.bottomRightCorner(nt, nt) - in.kit.transpose() * in.kii.solve(in.kit);
    for (int j = 0; j < nt; ++j)
      for (int i = 0; i < nt; ++i) trip.emplace_back(in.trace_ids[i], in.trace_ids[j], s_loc(i, j));
    impl_->interiors.push_back(std::move(in));
  }
  impl_->schur.compute(from_triplets(nskel, nskel, trip));
  if (impl_->schur.info() != Eigen::Success) throw SolverError("condensed skeleton factorization failed");
  impl_->ldlt_ready = true;
}

Eigen::VectorXd DpgSolver::solve(const Eigen::VectorXd& rhs) {
  if (rhs.size() != num_dofs_) throw SolverError("right-hand side has the wrong size");
  if (!impl_->ldlt_ready) factor_normal();
  Eigen::VectorXd x;
  if (!options_.static_condensation) {
    x = impl_->ldlt.solve(rhs);
  } else {
    const int nskel = num_dofs_ - num_interior_;
    Eigen::VectorXd g = rhs.tail(nskel);
    std::vector<Eigen::VectorXd> kinv_f(impl_->interiors.size());
    for (std::size_t t = 0; t < impl_->interiors.size(); ++t) {
      const auto& in = impl_->interiors[t];
      kinv_f[t] = in.kii.solve(rhs.segment(in.offset, in.size));
      const Eigen::VectorXd corr = in.kit.transpose() * kinv_f[t];
      for (std::size_t i = 0; i < in.trace_ids.size(); ++i) g(in.trace_ids[i]) -= corr(i);
    }
    const Eigen::VectorXd xs = impl_->schur.solve(g);
    x.resize(num_dofs_);
    x.tail(nskel) = xs;
    for (std::size_t t = 0; t < impl_->interiors.size(); ++t) {
      const auto& in = impl_->interiors[t];
      Eigen::VectorXd xt(in.trace_ids.size());
      for (std::size_t i = 0; i < in.trace_ids.size(); ++i) xt(i) = xs(in.trace_ids[i]);
      x.segment(in.offset, in.size) = kinv_f[t] - in.kii.solve(in.kit * xt);
    }
  }
  if (!x.allFinite()) throw SolverError("solution contains non-finite values (singular system?)");
  return x;
}

Eigen::VectorXd DpgSolver::solve_primal() {
  if (options_.method == SolverMethod::normal) return solve(system_.b);
  // Least squares on the whitened rows L^{-1} B x = L^{-1} l. Householder QR of each
  // element block eliminates the element-interior unknowns; only skeleton rows reach
  // the global solve, and the interiors are recovered by back substitution.
  const int nskel = num_dofs_ - num_interior_;
  struct Local {
    Eigen::MatrixXd r_ii, r_it;
    Eigen::VectorXd c;
    int ni = 0;
  };
  std::vector<Local> elim(locals_->size());
  Triplets trip;
  std::vector<double> rhs;
  for (std::size_t t = 0; t < locals_->size(); ++t) {
    const auto& s = (*locals_)[t];
    const auto llt = factor_gram(s, t);
    const Eigen::MatrixXd w = llt.matrixL().solve(s.B);
    const Eigen::VectorXd wl = llt.matrixL().solve(s.l);
    const int n = static_cast<int>(s.dofs.size());
    const int m = static_cast<int>(w.rows());
    int ni = 0;
    while (ni < n && s.dofs[ni] < num_interior_) ++ni;
    const int nt = n - ni;
    if (m < n) throw SolverError("element " + std::to_string(t) + " has fewer test than trial functions");

    const Eigen::HouseholderQR<Eigen::MatrixXd> qi(w.leftCols(ni));
    Eigen::MatrixXd rest(m, nt + 1);
    rest << w.rightCols(nt), wl;
    rest.applyOnTheLeft(qi.householderQ().transpose());
    Local& e = elim[t];
    e.ni = ni;
    e.r_ii = qi.matrixQR().topLeftCorner(ni, ni).triangularView<Eigen::Upper>();
    if (ni > 0 && !(e.r_ii.diagonal().cwiseAbs().minCoeff() > 1e-14 * e.r_ii.diagonal().cwiseAbs().maxCoeff())) {
      throw SolverError("interior block of element " + std::to_string(t) + " is rank deficient");
    }
    e.r_it = rest.topLeftCorner(ni, nt);
    e.c = rest.topRightCorner(ni, 1);

    // Compress the remaining rows to at most nt before they enter the global system.
    Eigen::MatrixXd tail = rest.bottomRows(m - ni);
    int keep = m - ni;
    if (keep > nt) {
      const Eigen::HouseholderQR<Eigen::MatrixXd> qt(tail.leftCols(nt));
      tail.applyOnTheLeft(qt.householderQ().transpose());
      keep = nt;
    }
    for (int i = 0; i < keep; ++i) {
      const int row = static_cast<int>(rhs.size());
      for (int j = 0; j < nt; ++j)
        if (tail(i, j) != 0.0) trip.emplace_back(row, s.dofs[ni + j] - num_interior_, tail(i, j));
      rhs.push_back(tail(i, nt));
    }
  }

  const SparseMatrix a = from_triplets(static_cast<int>(rhs.size()), nskel, trip);
  // Augmented system [I A; A^T 0] [r; x] = [b; 0]: its conditioning follows cond(A),
  // not cond(A)^2, and sparse LU factors it far faster than a sparse QR of A.
  const int m = static_cast<int>(a.rows());
  Triplets aug;
  aug.reserve(m + 2 * a.nonZeros());
  for (int i = 0; i < m; ++i) aug.emplace_back(i, i, 1.0);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      aug.emplace_back(static_cast<int>(it.row()), m + static_cast<int>(it.col()), it.value());
      aug.emplace_back(m + static_cast<int>(it.col()), static_cast<int>(it.row()), it.value());
    }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(from_triplets(m + nskel, m + nskel, aug));
  if (lu.info() != Eigen::Success) throw SolverError("least-squares system is rank deficient");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m + nskel);
  for (int i = 0; i < m; ++i) g(i) = rhs[i];
  const Eigen::VectorXd xs = lu.solve(g).tail(nskel);
  if (lu.info() != Eigen::Success) throw SolverError("least-squares solve failed");

  Eigen::VectorXd x(num_dofs_);
  x.tail(nskel) = xs;
  for (std::size_t t = 0; t < locals_->size(); ++t) {
    const auto& s = (*locals_)[t];
    const Local& e = elim[t];
    if (e.ni == 0) continue;
    Eigen::VectorXd xt(s.dofs.size() - e.ni);
    for (Eigen::Index j = 0; j < xt.size(); ++j) xt(j) = xs(s.dofs[e.ni + j] - num_interior_);
    x.segment(s.dofs[0], e.ni) =
        e.r_ii.triangularView<Eigen::Upper>().solve(e.c - e.r_it * xt);
  }
  if (!x.allFinite()) throw SolverError("least-squares solve failed");
  return x;
}

Eigen::VectorXd solve_primal(const std::vector<LocalSystem>& locals, const DofLayout& layout, SolveOptions options) {
  DpgSolver solver(locals, layout, options);
  return solver.solve_primal();
}

Eigen::VectorXd gather(const LocalSystem& sys, const Eigen::VectorXd& x) {
  Eigen::VectorXd xl(sys.dofs.size());
  for (std::size_t i = 0; i < sys.dofs.size(); ++i) xl(i) = x(sys.dofs[i]);
  return xl;
}

double ErrorRepresentation::energy() const {
  double s = 0.0;
  for (double e : eta) s += e * e;
  return std::sqrt(s);
}

ErrorRepresentation error_representation(const std::vector<LocalSystem>& locals, const Eigen::VectorXd& x) {
  ErrorRepresentation er;
  er.coeffs.reserve(locals.size());
  er.eta.reserve(locals.size());
  for (std::size_t t = 0; t < locals.size(); ++t) {
    const auto& s = locals[t];
    const Eigen::VectorXd r = s.B * gather(s, x) - s.l;
    const auto llt = factor_gram(s, t);
    Eigen::VectorXd y = llt.solve(r);
    er.eta.push_back(std::sqrt(std::max(0.0, r.dot(y))));
    er.coeffs.push_back(std::move(y));
  }
  return er;
}

ConditionEstimate condition_estimate(const SparseMatrix& a, int iterations) {
  const Eigen::Index n = a.rows();
  if (n == 0) return {1.0, 0.0, 0.0, "empty"};
  // Deterministic start vector with components in every direction.
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();

  Eigen::VectorXd w = v;
  double lmax = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd aw = a * w;
    lmax = w.dot(aw);
    const double nrm = aw.norm();
    if (nrm == 0.0) break;
    w = aw / nrm;
  }

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverError("condition estimate: factorization failed");
  w = v;
  double mu = 0.0;  // Rayleigh quotient of A^{-1}
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd z = ldlt.solve(w);
    mu = w.dot(z);
    const double nrm = z.norm();
    if (nrm == 0.0 || !std::isfinite(nrm)) break;
    w = z / nrm;
  }
  const double lmin = mu > 0.0 ? 1.0 / mu : 0.0;
  const double value = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  return {value, lmax, lmin, "power/inverse iteration on normal matrix"};
}

ConditionEstimate condition_estimate_dls(const SparseMatrix& normal_matrix, int iterations) {
  ConditionEstimate c = condition_estimate(normal_matrix, iterations);
  c.value = std::sqrt(c.value);
  c.lambda_max = std::sqrt(c.lambda_max);
  c.lambda_min = std::sqrt(c.lambda_min);
  c.method = "square root of normal-matrix power/inverse iteration";
  return c;
}

FieldEvaluator::FieldEvaluator(const Triangulation& mesh, const SpaceSpec& space, const DofLayout& layout,
                               const Eigen::VectorXd& x)
    : mesh_(&mesh), space_(space), layout_(&layout), x_(&x) {
  bases_.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) bases_.emplace_back(mesh.corners(t), space.order);
}

Eigen::VectorXd FieldEvaluator::u_coeffs(int t) const { return x_->segment(layout_->u_offset(t), space_.trial_size()); }

Eigen::VectorXd FieldEvaluator::u(int t, const Eigen::MatrixXd& points) const {
  return bases_[t].values(points) * u_coeffs(t);
}

Eigen::MatrixXd FieldEvaluator::sigma(int t, const Eigen::MatrixXd& points) const {
  const int np = space_.trial_size();
  const Eigen::MatrixXd v = bases_[t].values(points);
  Eigen::MatrixXd s(2, points.cols());
  s.row(0) = (v * x_->segment(layout_->sigma_offset(t, 0), np)).transpose();
  s.row(1) = (v * x_->segment(layout_->sigma_offset(t, 1), np)).transpose();
  return s;
}

double FieldEvaluator::u_at_centroid(int t) const {
  const Eigen::MatrixXd c = mesh_->centroid(t);
  return u(t, c)(0);
}

double l2_error_u(const Triangulation& mesh, const FieldEvaluator& f, const ScalarFunction& exact, int quad_degree) {
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const QuadratureRule rule = triangle_rule(mesh.corners(t), quad_degree);
    const Eigen::VectorXd uh = f.u(t, rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const double d = exact(rule.points.col(q)) - uh(q);
      sum += rule.weights(q) * d * d;
    }
  }
  return std::sqrt(sum);
}

double l2_error_sigma(const Triangulation& mesh, const FieldEvaluator& f, const VectorFunction& exact,
                      int quad_degree) {
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const QuadratureRule rule = triangle_rule(mesh.corners(t), quad_degree);
    const Eigen::MatrixXd sh = f.sigma(t, rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const Point d = exact(rule.points.col(q)) - sh.col(q);
      sum += rule.weights(q) * d.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double min_edge_length(const Triangulation& mesh) {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.edges()) h = std::min(h, e.length);
  return h;
}

}  // namespace dpg
