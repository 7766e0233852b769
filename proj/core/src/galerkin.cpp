#include "vortcert/galerkin.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/SVD>

#include "vortcert/error.hpp"
#include "vortcert/mesh_io.hpp"

namespace vortcert {

std::string to_string(BasisKind kind) {
  return kind == BasisKind::mixed_eigen ? "mixed-eigen" : "dirichlet-eigen";
}

std::string to_string(ProbeScheme s) {
  return s == ProbeScheme::tangent ? "tangent" : "finite-difference";
}

ScalarField GalerkinSpace::field(int j) const {
  return {solver->mesh(), basis.col(j), "basis_" + std::to_string(j)};
}

namespace {

// Appends f to the orthonormal columns of B (two Gram-Schmidt passes);
// returns false when f is numerically dependent on them.
bool append_orthonormal(const EllipticSolver& s, std::vector<Eigen::VectorXd>& cols, Eigen::VectorXd f) {
  const double n0 = s.l2_norm(f);
  if (n0 == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& c : cols) f -= s.l2_inner(c, f) * c;
  const double n1 = s.l2_norm(f);
  if (n1 <= 1e-10 * n0) return false;
  cols.push_back(f / n1);
  return true;
}

GalerkinSpace pack(std::shared_ptr<const EllipticSolver> solver, const std::vector<Eigen::VectorXd>& cols) {
  GalerkinSpace sp;
  sp.solver = std::move(solver);
  const auto nv = static_cast<Eigen::Index>(sp.solver->mesh()->num_vertices());
  sp.basis.resize(nv, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sp.basis.col(static_cast<Eigen::Index>(j)) = cols[j];
  return sp;
}

}  // namespace

GalerkinSpace build_space(std::shared_ptr<const EllipticSolver> solver, BasisKind kind,
                          const BoundaryProfile& h, const SpaceOptions& opts) {
  std::vector<Eigen::VectorXd> cols;
  std::vector<double> lambdas;
  if (opts.n_eigen > 0) {
    const EigenSystem sys = eigenpairs(*solver, kind == BasisKind::mixed_eigen ? BcKind::mixed : BcKind::dirichlet_all,
                                       opts.n_eigen, opts.eigen);
    for (const auto& f : sys.eigenfields) cols.push_back(f.values);
    lambdas = sys.eigenvalues;
  }
  bool phi0 = false;
  if (opts.boundary_function && !h.support_empty()) {
    const ScalarField ext = solver->solve_harmonic_extension(
        [&](BoundaryLabel label, const Vec2& x) {
          return label == BoundaryLabel::sigma1 ? h.value(std::atan2(x.y(), x.x())) : 0.0;
        },
        "phi_0");
    phi0 = append_orthonormal(*solver, cols, ext.values);
  }
  GalerkinSpace sp = pack(std::move(solver), cols);
  sp.source = kind;
  sp.eigenvalues = std::move(lambdas);
  sp.has_boundary_function = phi0;
  return sp;
}

GalerkinSpace space_from_fields(std::shared_ptr<const EllipticSolver> solver,
                                const std::vector<Eigen::VectorXd>& fields) {
  std::vector<Eigen::VectorXd> cols;
  for (const auto& f : fields) append_orthonormal(*solver, cols, f);
  return pack(std::move(solver), cols);
}

Eigen::VectorXd coefficients(const GalerkinSpace& space, const Eigen::VectorXd& f) {
  if (f.size() != space.basis.rows()) fail(ErrorKind::MeshMismatch, "field length differs from basis");
  if (space.N() == 0) return Eigen::VectorXd();
  return space.basis.transpose() * (space.solver->mass() * f);
}

Eigen::VectorXd synthesize(const GalerkinSpace& space, const Eigen::VectorXd& u) {
  if (space.N() == 0) return Eigen::VectorXd::Zero(space.basis.rows());
  return space.basis * u;
}

Projection project(const GalerkinSpace& space, const Eigen::VectorXd& f) {
  Projection p;
  p.u = coefficients(space, f);
  p.v = f - synthesize(space, p.u);
  return p;
}

Projection project(const GalerkinSpace& space, const ScalarField& f) {
  if (f.mesh != space.solver->mesh()) fail(ErrorKind::MeshMismatch, "field lives on a different mesh");
  return project(space, f.values);
}

double star_norm(const GalerkinSpace& space, const Projection& uv, double eta0) {
  const double vv = space.solver->l2_inner(uv.v, uv.v);
  return std::sqrt(uv.u.squaredNorm() + eta0 * std::max(0.0, vv));
}

double star_norm(const GalerkinSpace& space, const Eigen::VectorXd& f, double eta0) {
  return star_norm(space, project(space, f), eta0);
}

// ---------------------------------------------------------------------------

VelocityField velocity_for(const Eigen::VectorXd& omega, const LambdaContext& ctx) {
  const ScalarField phi{ctx.solver->mesh(), ctx.solver->poisson(omega), "phi"};
  return make_q(phi, ctx.psi_g, ctx.mu);
}

namespace {

void recheck(const VelocityField& q, const LambdaContext& ctx) {
  const TransversalityReport rep =
      check_transversality(q, ctx.h, ctx.transversality_samples, ctx.trace, ctx.threads);
  if (!rep.pass() || rep.c1 < ctx.c1_floor)
    fail(ErrorKind::TransversalityLost,
         "recomputed velocity violates (A1): c1 = " + format_double(rep.c1));
}

}  // namespace

Eigen::VectorXd apply_Lambda(const Eigen::VectorXd& omega, const LambdaContext& ctx) {
  if (ctx.h.support_empty()) return Eigen::VectorXd::Zero(omega.size());
  const VelocityField q = velocity_for(omega, ctx);
  recheck(q, ctx);
  return solve_transport(q, ctx.h, ctx.trace, ctx.threads).omega.values;
}

ScalarField apply_Lambda(const ScalarField& omega, const LambdaContext& ctx) {
  return {omega.mesh, apply_Lambda(omega.values, ctx), "lambda"};
}

OperatorMatrix assemble_A(const GalerkinSpace& space, const Eigen::VectorXd& omega,
                          const LambdaContext& ctx, ProbeScheme scheme, double fd_step) {
  const int N = space.N();
  OperatorMatrix out;
  out.scheme = scheme;
  out.entries = Eigen::MatrixXd::Zero(N, N);
  if (N == 0 || ctx.h.support_empty()) return out;

  if (scheme == ProbeScheme::finite_difference) {
    const double eps = fd_step * std::max(1.0, ctx.solver->l2_norm(omega));
    out.fd_step = eps;
    for (int j = 0; j < N; ++j) {
      const Eigen::VectorXd plus = apply_Lambda(Eigen::VectorXd(omega + eps * space.basis.col(j)), ctx);
      const Eigen::VectorXd minus = apply_Lambda(Eigen::VectorXd(omega - eps * space.basis.col(j)), ctx);
      out.entries.col(j) = coefficients(space, (plus - minus) / (2.0 * eps));
    }
    return out;
  }

  const Mesh& mesh = *ctx.solver->mesh();
  const Eigen::MatrixXd phis = ctx.solver->poisson(space.basis);
  std::vector<Eigen::MatrixX2d> fields;
  fields.reserve(N);
  for (int j = 0; j < N; ++j) fields.push_back(recovered_perp_gradient(mesh, phis.col(j)));
  const PerturbationSet pert = PerturbationSet::from_nodal(fields);
  const VelocityField q = velocity_for(omega, ctx);
  recheck(q, ctx);
  const Eigen::MatrixXd wt = tangent_field(q, pert, ctx.h, ctx.trace, ctx.c1_floor, ctx.threads);
  out.entries = space.basis.transpose() * (ctx.solver->mass() * wt);
  return out;
}

GammaBound gamma_bound(const Eigen::MatrixXd& A) {
  GammaBound g;
  if (A.size() == 0) return g;
  const Eigen::MatrixXd IA = Eigen::MatrixXd::Identity(A.rows(), A.cols()) - A;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(IA);
  g.sigma_min = svd.singularValues().minCoeff();
  if (!(g.sigma_min >= 1e-10)) fail(ErrorKind::SingularJacobian, "I - A is numerically singular");
  g.gamma = std::max(1.0, 1.0 / g.sigma_min);
  return g;
}

// ---------------------------------------------------------------------------

UpsilonMap::UpsilonMap(const GalerkinSpace& space, Eigen::MatrixXd A, LambdaContext ctx)
    : space_(space), A_(std::move(A)), ctx_(std::move(ctx)) {
  if (A_.rows() != space_.N() || A_.cols() != space_.N())
    fail(ErrorKind::MeshMismatch, "A does not match the Galerkin dimension");
  if (space_.N() > 0) {
    gamma_bound(A_);
    lu_.compute(Eigen::MatrixXd::Identity(space_.N(), space_.N()) - A_);
  }
}

Eigen::VectorXd UpsilonMap::solve(const Eigen::VectorXd& r) const {
  if (space_.N() == 0) return r;
  const Projection p = project(space_, r);
  return synthesize(space_, lu_.solve(p.u)) + p.v;
}

Eigen::VectorXd UpsilonMap::operator()(const Eigen::VectorXd& omega, Eigen::VectorXd* lambda_out) const {
  Eigen::VectorXd lam = apply_Lambda(omega, ctx_);
  Eigen::VectorXd r = lam;
  if (space_.N() > 0) r -= synthesize(space_, A_ * coefficients(space_, omega));
  if (lambda_out) *lambda_out = std::move(lam);
  return solve(r);
}

IterationResult iterate(const Eigen::VectorXd& omega0, const UpsilonMap& ups, const IterationOptions& opts) {
  const GalerkinSpace& sp = ups.space();
  const EllipticSolver& s = *sp.solver;
  IterationResult res;
  res.omega_bar = omega0;
  if (ups.context().h.support_empty() && omega0.isZero(0.0)) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd omega = omega0;
  for (int n = 0; n < opts.max_iter; ++n) {
    Eigen::VectorXd lam;
    Eigen::VectorXd next = ups(omega, &lam);
    IterationRow row;
    row.n = n;
    row.star_step = star_norm(sp, Eigen::VectorXd(next - omega), opts.eta0);
    row.l2_dist = s.l2_norm(omega - omega0);
    row.lambda_residual = s.l2_norm(omega - lam);
    res.history.push_back(row);
    if (opts.enforce_radius > 0.0 &&
        (row.l2_dist > opts.enforce_radius || s.l2_norm(next - omega0) > opts.enforce_radius))
      fail(ErrorKind::NeighborhoodExit, "iterate left the certified neighborhood");
    omega = std::move(next);
    if (row.star_step <= opts.stop_tol) {
      res.converged = true;
      break;
    }
  }
  for (std::size_t i = 1; i < res.history.size(); ++i) {
    const double prev = res.history[i - 1].star_step;
    if (prev > 0.0) res.ratios.push_back(res.history[i].star_step / prev);
  }
  res.omega_bar = omega;
  res.final_lambda_residual = s.l2_norm(omega - apply_Lambda(omega, ups.context()));
  return res;
}

void write_matrix_csv(const Eigen::MatrixXd& A, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path.string());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) os << (j ? "," : "") << format_double(A(i, j));
    os << '\n';
  }
}

void write_history_csv(const std::vector<IterationRow>& history, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path.string());
  os << "n,star_step,l2_dist_from_omega0,lambda_residual\n";
  for (const auto& r : history)
    os << r.n << ',' << format_double(r.star_step) << ',' << format_double(r.l2_dist) << ','
       << format_double(r.lambda_residual) << '\n';
}

}  // namespace vortcert
