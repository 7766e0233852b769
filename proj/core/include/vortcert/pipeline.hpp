#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vortcert/certificate.hpp"
#include "vortcert/config.hpp"
#include "vortcert/galerkin.hpp"

namespace vortcert {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Mesh, solver, boundary data and the Galerkin initial guess of one run.
struct Setup {
  RunConfig config;
  MeshPtr mesh;
  std::shared_ptr<const EllipticSolver> solver;
  ScalarField psi_g;
  LambdaContext ctx;
  GalerkinSpace space;
  Eigen::VectorXd omega0;
  int galerkin_steps = 0;
};

/// Without `with_omega0` the space is built but omega0 stays zero.
Setup prepare(const RunConfig& config, std::vector<StageTiming>* timings = nullptr, bool with_omega0 = true);

/// Picard iteration u <- P Lambda(u) in U, started from P Lambda(0).
Eigen::VectorXd galerkin_initial_guess(const GalerkinSpace& space, const LambdaContext& ctx, int max_steps,
                                       int* steps = nullptr);

struct RunReport {
  std::optional<Certificate> certificate;
  std::optional<IterationResult> iteration;
  std::vector<std::string> manifest;
  std::vector<StageTiming> timings;
  std::string config_echo;
  std::string config_hash;
  std::string iteration_error;
};

/// Full pipeline; writes certificate.json/.txt, history.csv, A.csv, mesh and
/// field files, report.json under `out_dir`.
RunReport run_certify(const RunConfig& config, const std::filesystem::path& out_dir);
/// Omega_0 and the iteration only; writes omega_bar/phi_bar CSV and VTK.
RunReport run_solve(const RunConfig& config, const std::filesystem::path& out_dir);

struct TracePoint {
  Vec2 y = Vec2::Zero();
  bool ok = false;
  std::string error;
  TraceOutcome backward = TraceOutcome::failure;
  double tau = 0.0;
  TraceOutcome forward = TraceOutcome::failure;
  double T = 0.0;
};

/// Backward and forward traces under q(Omega_0); one CSV per point and direction.
std::vector<TracePoint> run_trace(const RunConfig& config, const std::vector<Vec2>& points,
                                  const std::filesystem::path& out_dir);

/// x,y rows with a header line.
std::vector<Vec2> read_points_csv(const std::filesystem::path& path);

}  // namespace vortcert
