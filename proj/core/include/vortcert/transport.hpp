#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vortcert/boundary_data.hpp"
#include "vortcert/elliptic.hpp"
#include "vortcert/geometry.hpp"

namespace vortcert {

/// q(x) = Q(x) - mu x, where Q is the nodally recovered perp gradient of
/// Phi + Psi_g, interpolated linearly on each triangle. The -mu x part is
/// evaluated exactly.
class VelocityField {
 public:
  VelocityField(MeshPtr mesh, Eigen::MatrixX2d nodal, double mu);
  /// Discrete part identically zero: q = -mu x.
  static VelocityField linear(MeshPtr mesh, double mu);

  struct Sample {
    Vec2 q = Vec2::Zero();
    Mat2 Dq = Mat2::Zero();
    int triangle = -1;
    std::array<double, 3> bary{};
  };

  /// `hint` is a triangle index to start point location from; updated.
  Sample eval(const Vec2& x, int& hint) const;
  /// Evaluation with the affine data of triangle `tri`, also beyond its edges.
  Sample eval_in(const Vec2& x, int tri) const;
  Vec2 operator()(const Vec2& x) const;

  const MeshPtr& mesh() const { return mesh_; }
  double mu() const { return mu_; }
  bool discrete_zero() const { return discrete_zero_; }
  const Eigen::MatrixX2d& nodal() const { return nodal_; }

 private:
  MeshPtr mesh_;
  Eigen::MatrixX2d nodal_;
  double mu_;
  bool discrete_zero_;
};

/// q = perp grad(Phi) + perp grad(Psi_g) - mu x.
VelocityField make_q(const ScalarField& Phi, const ScalarField& Psi_g, double mu);

/// A batch of m perturbation fields q~_1..q~_m, either nodal (recovered P1
/// vector fields, stored as vertex rows of [x_1 y_1 x_2 y_2 ...]) or given by
/// a closure writing a 2 x m block.
struct PerturbationSet {
  int count = 0;
  Eigen::MatrixXd nodal;
  std::function<void(const Vec2&, Eigen::Ref<Eigen::Matrix<double, 2, Eigen::Dynamic>>)> analytic;

  static PerturbationSet from_nodal(const std::vector<Eigen::MatrixX2d>& fields);
  static PerturbationSet from_function(
      int count,
      std::function<void(const Vec2&, Eigen::Ref<Eigen::Matrix<double, 2, Eigen::Dynamic>>)> f);

  void eval(const Mesh& mesh, const VelocityField::Sample& at, const Vec2& x,
            Eigen::Ref<Eigen::Matrix<double, 2, Eigen::Dynamic>> out) const;
};

enum class Direction { backward, forward };
enum class TraceOutcome { hit_sigma1, hit_sigma2, timeout, stagnation, failure };
std::string to_string(TraceOutcome outcome);

struct TraceOptions {
  double T_max = 50.0;
  double tol = 1e-9;
  bool keep_samples = false;
};

struct CharacteristicTrace {
  Vec2 start = Vec2::Zero();
  Direction direction = Direction::backward;
  TraceOutcome outcome = TraceOutcome::failure;
  double exit_time = 0.0;
  Vec2 exit_point = Vec2::Zero();
  std::vector<std::pair<double, Vec2>> samples;
  std::string message;
};

/// Integrates x' = -q (backward) or x' = q (forward) from y until the first
/// boundary crossing. Throws TraceFailure when y lies outside the domain.
CharacteristicTrace trace(const VelocityField& q, const Vec2& y, Direction dir,
                          const TraceOptions& opts = {});

void write_trace_csv(const CharacteristicTrace& tr, const std::filesystem::path& path);

struct TransversalityReport {
  double c1 = 0.0;
  double T_star = 0.0;
  bool all_exit_sigma2 = true;
  int samples_checked = 0;
  std::pair<Vec2, double> worst_entry{Vec2::Zero(), 0.0};
  std::pair<Vec2, double> worst_exit{Vec2::Zero(), 0.0};
  std::vector<Vec2> exit_points;
  double T_max = 0.0;

  bool pass() const { return c1 > 0.0 && all_exit_sigma2 && T_star < T_max; }
};

TransversalityReport check_transversality(const VelocityField& q, const BoundaryProfile& h,
                                          int n_samples, const TraceOptions& opts,
                                          unsigned threads = 1);

struct TransportResult {
  ScalarField omega;
  Eigen::VectorXd tau;
  std::vector<TraceOutcome> outcomes;
  int timeouts = 0;
  int failures = 0;
};

/// Omega(y) = e^tau h(xi) where the backward trace reaches Sigma_1, else 0.
TransportResult solve_transport(const VelocityField& q, const BoundaryProfile& h,
                                const TraceOptions& opts, unsigned threads = 1);

struct TangentState {
  CharacteristicTrace base;
  double omega = 0.0;
  Eigen::VectorXd tau_tilde;
  Eigen::Matrix<double, 2, Eigen::Dynamic> xi_tilde;
  Eigen::VectorXd omega_tilde;
  Eigen::Matrix<double, 2, Eigen::Dynamic> w_exit;
};

/// First-order response of Omega(y) to q -> q + eps q~_j for each member of
/// the perturbation set, by integrating w' = -Dq w - q~ along the backward
/// characteristic. `c1` guards degenerate exits (0 disables the margin test).
TangentState tangent_solve(const VelocityField& q, const PerturbationSet& qt, const Vec2& y,
                           const BoundaryProfile& h, const TraceOptions& opts, double c1 = 0.0);

/// Omega~ at every vertex, one column per perturbation.
Eigen::MatrixXd tangent_field(const VelocityField& q, const PerturbationSet& qt,
                              const BoundaryProfile& h, const TraceOptions& opts, double c1 = 0.0,
                              unsigned threads = 1);

/// det of d x(t, y) / d y along the backward flow x' = -q.
double flow_jacobian_check(const VelocityField& q, const Vec2& y, double t,
                           const TraceOptions& opts = {});

struct SupBounds {
  double safety = 1.05;
  double sup_q = 0.0;
  double sup_Dq = 0.0;
  double M = 0.0;
  double sup_q_sigma1 = 0.0;
  double inf_nq_sigma1 = 0.0;
  int boundary_samples = 0;
};

SupBounds sup_bounds(const VelocityField& q, const BoundaryProfile& h, int boundary_samples = 1024,
                     double safety = 1.05);

/// Sampled Lipschitz constant of <n, q> along a boundary component.
double normal_velocity_lipschitz(const VelocityField& q, BoundaryLabel label, int samples = 2048);

}  // namespace vortcert
