#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "vortcert/elliptic.hpp"
#include "vortcert/transport.hpp"

namespace vortcert {

enum class BasisKind { mixed_eigen, dirichlet_eigen };
std::string to_string(BasisKind kind);

/// Mass-orthonormal basis of U, stored as nodal columns.
struct GalerkinSpace {
  std::shared_ptr<const EllipticSolver> solver;
  Eigen::MatrixXd basis;
  BasisKind source = BasisKind::mixed_eigen;
  std::vector<double> eigenvalues;
  bool has_boundary_function = false;

  int N() const { return static_cast<int>(basis.cols()); }
  ScalarField field(int j) const;
};

struct SpaceOptions {
  int n_eigen = 40;
  /// Append the harmonic extension of h (0 on Sigma_2) and re-orthonormalize.
  bool boundary_function = true;
  EigenOptions eigen;
};

GalerkinSpace build_space(std::shared_ptr<const EllipticSolver> solver, BasisKind kind,
                          const BoundaryProfile& h, const SpaceOptions& opts = {});
/// Space spanned by given fields, orthonormalized in order.
GalerkinSpace space_from_fields(std::shared_ptr<const EllipticSolver> solver,
                                const std::vector<Eigen::VectorXd>& fields);

struct Projection {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

Projection project(const GalerkinSpace& space, const Eigen::VectorXd& f);
Projection project(const GalerkinSpace& space, const ScalarField& f);
Eigen::VectorXd coefficients(const GalerkinSpace& space, const Eigen::VectorXd& f);
Eigen::VectorXd synthesize(const GalerkinSpace& space, const Eigen::VectorXd& u);

double star_norm(const GalerkinSpace& space, const Eigen::VectorXd& f, double eta0);
double star_norm(const GalerkinSpace& space, const Projection& uv, double eta0);

struct LambdaContext {
  std::shared_ptr<const EllipticSolver> solver;
  ScalarField psi_g;
  double mu = 1.0;
  BoundaryProfile h;
  TraceOptions trace;
  int transversality_samples = 256;
  /// Lambda refuses fields whose (A1) margin drops below this value.
  double c1_floor = 0.0;
  unsigned threads = 1;
};

VelocityField velocity_for(const Eigen::VectorXd& omega, const LambdaContext& ctx);

/// Gamma(Lap^{-1} Omega); throws TransversalityLost when (A1) fails for the
/// recomputed velocity field.
Eigen::VectorXd apply_Lambda(const Eigen::VectorXd& omega, const LambdaContext& ctx);
ScalarField apply_Lambda(const ScalarField& omega, const LambdaContext& ctx);

enum class ProbeScheme { tangent, finite_difference };
std::string to_string(ProbeScheme s);

struct OperatorMatrix {
  Eigen::MatrixXd entries;
  ProbeScheme scheme = ProbeScheme::tangent;
  double fd_step = 0.0;
};

/// P D_u Lambda(Omega) in the orthonormal basis. For the FD scheme the step
/// is fd_step * max(1, ||Omega||).
OperatorMatrix assemble_A(const GalerkinSpace& space, const Eigen::VectorXd& omega,
                          const LambdaContext& ctx, ProbeScheme scheme = ProbeScheme::tangent,
                          double fd_step = 1e-4);

struct GammaBound {
  double gamma = 1.0;
  double sigma_min = 1.0;
};

/// gamma = max(1, 1/sigma_min(I - A)).
GammaBound gamma_bound(const Eigen::MatrixXd& A);

/// Upsilon(Omega) = (I - A P)^{-1} (Lambda(Omega) - A P Omega), evaluated blockwise.
class UpsilonMap {
 public:
  UpsilonMap(const GalerkinSpace& space, Eigen::MatrixXd A, LambdaContext ctx);

  Eigen::VectorXd operator()(const Eigen::VectorXd& omega, Eigen::VectorXd* lambda_out = nullptr) const;
  /// Block solve of (I - A P) x = r.
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const;

  const GalerkinSpace& space() const { return space_; }
  const Eigen::MatrixXd& A() const { return A_; }
  const LambdaContext& context() const { return ctx_; }

 private:
  GalerkinSpace space_;
  Eigen::MatrixXd A_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  LambdaContext ctx_;
};

struct IterationRow {
  int n = 0;
  double star_step = 0.0;
  double l2_dist = 0.0;
  double lambda_residual = 0.0;
};

struct IterationOptions {
  int max_iter = 50;
  double stop_tol = 1e-10;
  double eta0 = 1.0;
  /// Abort with NeighborhoodExit when ||Omega_n - Omega_0|| exceeds this (<= 0 disables).
  double enforce_radius = 0.0;
};

struct IterationResult {
  Eigen::VectorXd omega_bar;
  std::vector<IterationRow> history;
  bool converged = false;
  double final_lambda_residual = 0.0;
  /// star_step[n+1] / star_step[n] for consecutive recorded steps.
  std::vector<double> ratios;
};

IterationResult iterate(const Eigen::VectorXd& omega0, const UpsilonMap& ups,
                        const IterationOptions& opts);

void write_matrix_csv(const Eigen::MatrixXd& A, const std::filesystem::path& path);
void write_history_csv(const std::vector<IterationRow>& history, const std::filesystem::path& path);

}  // namespace vortcert
