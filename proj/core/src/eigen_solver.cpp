#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "vortcert/elliptic.hpp"
#include "vortcert/error.hpp"
#include "vortcert/mesh_io.hpp"

namespace vortcert {

namespace {

Eigen::MatrixXd random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd X(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = u(rng);
  return X;
}

SpMat restrict(const SpMat& A, const std::vector<int>& index, Eigen::Index n) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      const int r = index[it.row()], cc = index[it.col()];
      if (r >= 0 && cc >= 0) trip.emplace_back(r, cc, it.value());
    }
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// Columns of Z made M-orthonormal; returns false when the block is
// numerically zero or rank deficient.
bool orthonormalize(Eigen::MatrixXd& Z, const SpMat& M) {
  Eigen::MatrixXd G = Z.transpose() * (M * Z);
  G = 0.5 * (G + G.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) return false;
  Z = llt.matrixU().solve<Eigen::OnTheRight>(Z);
  return true;
}

}  // namespace

EigenSystem eigenpairs(const EllipticSolver& solver, BcKind bc, int K, const EigenOptions& opts) {
  const Mesh& m = *solver.mesh();
  const int nv = static_cast<int>(m.num_vertices());
  std::vector<int> index(nv, -1), unknowns;
  for (int v = 0; v < nv; ++v) {
    const VertexFlag f = m.vertex_flags()[v];
    const bool fixed = bc == BcKind::dirichlet_all ? f != VertexFlag::interior : f == VertexFlag::sigma1;
    if (!fixed) {
      index[v] = static_cast<int>(unknowns.size());
      unknowns.push_back(v);
    }
  }
  const auto nu = static_cast<Eigen::Index>(unknowns.size());
  if (K < 1 || K >= nu) fail(ErrorKind::EigenFailure, "requested eigenpair count out of range");

  const SpMat Ku = restrict(solver.stiffness(), index, nu);
  const SpMat Mu = restrict(solver.mass(), index, nu);
  Eigen::SimplicialLDLT<SpMat> ldlt(Ku);
  if (ldlt.info() != Eigen::Success) fail(ErrorKind::EigenFailure, "stiffness factorization failed");

  const Eigen::Index p = std::min<Eigen::Index>(nu, std::max(K + 8, 2 * K));
  Eigen::MatrixXd X = random_block(nu, p, opts.seed);
  Eigen::VectorXd lambda;
  EigenSystem sys;
  sys.bc = bc;
  bool converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd Y = ldlt.solve(Mu * X);
    Eigen::MatrixXd Kr = Y.transpose() * (Ku * Y);
    Eigen::MatrixXd Mr = Y.transpose() * (Mu * Y);
    Kr = 0.5 * (Kr + Kr.transpose());
    Mr = 0.5 * (Mr + Mr.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Kr, Mr);
    if (ges.info() != Eigen::Success) fail(ErrorKind::EigenFailure, "Rayleigh-Ritz step failed");
    X = Y * ges.eigenvectors();
    lambda = ges.eigenvalues();
    sys.iterations = it;

    double worst = 0.0;
    for (int i = 0; i < K; ++i) {
      const Eigen::VectorXd Mx = Mu * X.col(i);
      const Eigen::VectorXd r = Ku * X.col(i) - lambda[i] * Mx;
      worst = std::max(worst, r.norm() / (std::abs(lambda[i]) * Mx.norm()));
    }
    if (worst <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) fail(ErrorKind::EigenFailure, "inverse subspace iteration did not converge");

  for (int i = 0; i < K; ++i) {
    ScalarField f = ScalarField::zeros(solver.mesh(), "phi_" + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < nu; ++j) f.values[unknowns[j]] = X(j, i);
    Eigen::Index imax = 0;
    f.values.cwiseAbs().maxCoeff(&imax);
    if (f.values[imax] < 0.0) f.values = -f.values;
    f.values /= solver.l2_norm(f.values);
    sys.eigenvalues.push_back(lambda[i]);
    sys.eigenfields.push_back(std::move(f));
  }
  return sys;
}

void write_eigensystem_csv(const EigenSystem& sys, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / "eigenvalues.csv");
  if (!os) fail(ErrorKind::IoError, "cannot write eigenvalues.csv");
  os << "index,lambda,bc\n";
  for (std::size_t i = 0; i < sys.eigenvalues.size(); ++i)
    os << i + 1 << ',' << format_double(sys.eigenvalues[i]) << ',' << to_string(sys.bc) << '\n';
  for (std::size_t i = 0; i < sys.eigenfields.size(); ++i)
    write_field_csv(dir / ("eigenfield_" + std::to_string(i + 1) + ".csv"), sys.eigenfields[i].values);
}

Epsilon0Estimate estimate_epsilon0(const EllipticSolver& solver, const Eigen::MatrixXd& basis,
                                   const Epsilon0Options& opts) {
  const SpMat& M = solver.mass();
  const Eigen::Index n = M.rows();
  const bool has_basis = basis.cols() > 0;
  if (has_basis && basis.rows() != n) fail(ErrorKind::MeshMismatch, "basis length differs from vertex count");

  auto complement = [&](Eigen::MatrixXd Z) {
    if (has_basis) Z -= basis * (basis.transpose() * (M * Z));
    return Z;
  };
  auto op = [&](const Eigen::MatrixXd& X) {
    return complement(solver.poisson(solver.poisson(complement(X))));
  };

  Epsilon0Estimate est;
  est.safety_factor = opts.safety_factor;
  const Eigen::Index b = std::min<Eigen::Index>(std::max(1, opts.block), n);
  Eigen::MatrixXd X = complement(random_block(n, b, opts.seed));
  if (!orthonormalize(X, M)) return est;
  Eigen::MatrixXd Z = op(X);

  double prev = -1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd H = X.transpose() * (M * Z);
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double theta = std::max(0.0, es.eigenvalues()[b - 1]);
    est.iterations = it;
    est.direction = X * es.eigenvectors().col(b - 1);
    est.norm = std::sqrt(theta);
    // The whole space lies in U: the operator vanishes up to round-off.
    if (theta <= 1e-28) {
      est.norm = 0.0;
      break;
    }
    if (prev >= 0.0 && std::abs(theta - prev) <= opts.tol * theta) break;
    if (it == opts.max_iter) fail(ErrorKind::PowerIterationStagnant, "epsilon0 power iteration did not settle");
    prev = theta;
    X = Z;
    if (!orthonormalize(X, M)) {
      est.norm = 0.0;
      break;
    }
    Z = op(X);
  }
  const double nd = solver.l2_norm(est.direction);
  if (nd > 0.0) est.direction /= nd;
  est.epsilon0 = est.norm * est.safety_factor;
  return est;
}

}  // namespace vortcert
