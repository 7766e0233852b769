#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vortcert/boundary_data.hpp"
#include "vortcert/elliptic.hpp"
#include "vortcert/galerkin.hpp"
#include "vortcert/transport.hpp"

namespace vortcert {

enum class Provenance { analytic_formula, sampled_bound, discrete_estimate, user_supplied };
std::string to_string(Provenance p);

struct LedgerEntry {
  std::string name;
  double value = 0.0;
  Provenance provenance = Provenance::analytic_formula;
  std::vector<std::string> inputs;
};

/// Named constants in insertion order. Setting an existing name overwrites it.
class ConstantsLedger {
 public:
  void set(const std::string& name, double value, Provenance p, std::vector<std::string> inputs = {});
  bool has(const std::string& name) const { return find(name) != nullptr; }
  const LedgerEntry* find(const std::string& name) const;
  /// Throws LedgerIncomplete when absent.
  double value(const std::string& name) const;
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::vector<std::string> missing(const std::vector<std::string>& required) const;

 private:
  std::vector<LedgerEntry> entries_;
};

/// Sup norms of h and dh/dtheta over Sigma_1, from dense sampling of the
/// analytic expression.
struct BoundaryNorms {
  double h_c0 = 0.0;
  double dh_c0 = 0.0;
};
BoundaryNorms boundary_norms(const BoundaryProfile& h, int samples = 16384);

/// C~ = ||h|| / inf|<n,q>| + (1 + sup|q| / inf|<n,q>|) ||Dh||, suprema over
/// the support of h on Sigma_1.
double compute_C_tilde(const SupBounds& b, const BoundaryNorms& hn);

/// kappa(t) = (e^{(2M+1)t} - e^{-2 mu t}) / (4M + 4mu + 2).
double kappa_of(double M, double t, double mu);
/// K(M,t) = e^t sqrt(kappa(t)).
double K_of(double M, double t, double mu);

struct Kappa0 {
  double kappa0 = 0.0;
  double over_lambda1 = 0.0;
};
Kappa0 kappa0(double C_tilde, double M, double delta1, double T_star, double mu, double lambda1);

/// sup |f(x)-f(y)| / |x-y|^alpha over vertex pairs with 0 < |x-y| < delta.
double holder_seminorm(const ScalarField& f, double alpha, double delta);

/// L2 norm over the disc B(rho e_1, rho) of max(0, (c/2) delta^alpha - c|x|^alpha).
double delta_c(double rho, double alpha, double delta, double c);

struct Delta1Inputs {
  double c1 = 0.0;
  double T_star = 0.0;
  double M = 0.0;
  /// Lipschitz constant of <n,q> along Sigma_2.
  double normal_lipschitz = 0.0;
  /// Distance the exit segments may drift before leaving the exit corridor.
  double corridor = 0.0;
};

struct Delta1Result {
  double delta1 = 0.0;
  int halvings = 0;
  double margin_lhs = 0.0;
  double deviation = 0.0;
};

/// Largest delta1 in {1, 1/2, ..., 2^-20} satisfying
///   c1 - delta1 (1 + L_n G) >= c1 / 2   and   delta1 G <= corridor,
/// with G = (T*+1) e^{M (T*+1)}. Throws NoMargin.
Delta1Result delta1_margin(const Delta1Inputs& in);

/// Smallest distance from the traced exit points to Sigma_1.
double corridor_half_width(const Domain& d, const TransversalityReport& rep);

/// max_j ||phi_j||_{C^1}, sampled at vertices and triangle gradients.
double basis_c1_bound(const GalerkinSpace& space, double safety = 1.05);

struct C1Inputs {
  double T_star = 0.0;
  double M = 0.0;
  double C_tilde = 0.0;
  double h_c0 = 0.0;
  double gamma = 1.0;
  double A_norm = 0.0;
  double B_U = 0.0;
};
/// e^{T*+1} ||h|| + C~ e^{(T*+1)(M+2)}.
double C1_core(const C1Inputs& in);
/// (1 + gamma (1 + ||A||) B_U) * core.
double C1_bound(const C1Inputs& in);

/// delta = min(0.99, (2 C1 C2 / delta1)^-2); 0.99 when C1 = 0.
double holder_window(double C1, double C2, double delta1);

struct Delta2Options {
  int n_probes = 4;
  int halvings = 30;
  int bisections = 12;
  std::uint64_t seed = 1;
};

struct Delta2Result {
  double delta2 = 0.0;
  /// Largest ||P D_u Lambda(Omega) - A|| seen among probes at delta2.
  double worst_gap = 0.0;
  int candidates = 0;
};

/// Largest radius r <= cap such that ||P D_u Lambda(Omega) - A|| <= bound on
/// sampled points of the L2 sphere of radius r around omega0. Throws NoNeighborhood.
Delta2Result delta2_estimate(const GalerkinSpace& space, const Eigen::VectorXd& omega0,
                             const Eigen::MatrixXd& A, double bound, double cap,
                             const Eigen::VectorXd& v_direction, const LambdaContext& ctx,
                             const Delta2Options& opts = {});

struct CheckRecord {
  std::string name;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// sqrt(2) kappa0 (eps0^2 + eps0/lambda1)^{1/2}.
double block_bound(double kappa0, double epsilon0, double lambda1);
CheckRecord check_A3(double kappa0, double epsilon0, double lambda1, double gamma);
double eta0_from(double lambda1, double epsilon0);

/// Operator norm of [[B11, B12], [B21, B22]] on U x V with the star norm
/// sqrt(|u|^2 + eta0 |v|^2).
double star_operator_norm(const Eigen::MatrixXd& B11, const Eigen::MatrixXd& B12,
                          const Eigen::MatrixXd& B21, const Eigen::MatrixXd& B22, double eta0);

struct Lemma31Audit {
  int perturbations = 0;
  double bound_factor = 0.0;
  double max_ratio = 0.0;
  std::vector<double> ratios;
  bool pass() const { return max_ratio <= 1.0; }
};

/// Random truncated Fourier-Bessel stream functions psi, perturbations
/// q~ = grad-perp psi; compares ||Omega~|| with C~ K(M,T*) ||q~||_{L2(D*)}.
Lemma31Audit lemma31_audit(const VelocityField& q, const BoundaryProfile& h, double C_tilde, double M,
                           double T_star, int n_perturbations, std::uint64_t seed,
                           const TraceOptions& opts, unsigned threads = 1);

}  // namespace vortcert
