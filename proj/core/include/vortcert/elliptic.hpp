#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vortcert/boundary_data.hpp"
#include "vortcert/geometry.hpp"

namespace vortcert {

using SpMat = Eigen::SparseMatrix<double>;

/// Continuous piecewise-linear nodal function.
struct ScalarField {
  MeshPtr mesh;
  Eigen::VectorXd values;
  std::string name;

  static ScalarField zeros(MeshPtr mesh, std::string name = {});
  static ScalarField interpolate(MeshPtr mesh, const std::function<double(const Vec2&)>& f,
                                 std::string name = {});
  /// Barycentric interpolation; affine extension from the nearest boundary
  /// triangle outside the mesh.
  double operator()(const Vec2& x) const;
};

/// One constant 2-vector per triangle.
struct ElementwiseVectorField {
  MeshPtr mesh;
  std::vector<Vec2> values;
};

enum class BcKind { dirichlet_all, mixed };
std::string to_string(BcKind bc);

struct EigenSystem {
  std::vector<double> eigenvalues;
  std::vector<ScalarField> eigenfields;
  BcKind bc = BcKind::dirichlet_all;
  int iterations = 0;
};

/// P1 stiffness/mass assembly plus the Dirichlet factorization shared by the
/// Poisson solve and the harmonic extension.
class EllipticSolver {
 public:
  explicit EllipticSolver(MeshPtr mesh);

  const MeshPtr& mesh() const { return mesh_; }
  const SpMat& stiffness() const { return K_; }
  const SpMat& mass() const { return M_; }
  const std::vector<int>& interior() const { return interior_; }
  bool is_boundary(int v) const { return interior_index_[v] < 0; }

  /// Phi with Laplacian(Phi) = rhs, Phi = 0 on the boundary.
  ScalarField solve_poisson_dirichlet(const ScalarField& rhs) const;
  Eigen::VectorXd poisson(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd poisson(const Eigen::MatrixXd& rhs) const;

  /// Discrete harmonic function with the given boundary nodal values.
  ScalarField solve_harmonic_extension(const std::function<double(BoundaryLabel, const Vec2&)>& g,
                                       std::string name = "psi_g") const;
  ScalarField solve_harmonic_extension(const StreamBoundaryData& g) const;

  /// Relative weak residual of a Poisson solution, in the interior rows.
  double poisson_residual(const Eigen::VectorXd& phi, const Eigen::VectorXd& rhs) const;

  double l2_inner(const ScalarField& f, const ScalarField& g) const;
  double l2_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
  double l2_norm(const Eigen::VectorXd& f) const;

 private:
  struct Factor;
  MeshPtr mesh_;
  SpMat K_, M_, K_II_, K_IB_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
  std::vector<int> interior_index_;
  std::shared_ptr<Factor> factor_;
};

ElementwiseVectorField gradient(const ScalarField& f);
/// (-d2 f, d1 f) per triangle.
ElementwiseVectorField perp_gradient(const ScalarField& f);
/// Area-weighted nodal average of the per-triangle perp gradient, one row
/// per vertex. Exact for affine f.
Eigen::MatrixX2d recovered_perp_gradient(const ScalarField& f);
Eigen::MatrixX2d recovered_perp_gradient(const Mesh& mesh, const Eigen::VectorXd& f);

struct EigenOptions {
  double tol = 1e-11;
  int max_iter = 600;
  std::uint64_t seed = 12345;
};

EigenSystem eigenpairs(const EllipticSolver& solver, BcKind bc, int K,
                       const EigenOptions& opts = {});

void write_eigensystem_csv(const EigenSystem& sys, const std::filesystem::path& dir);

struct Epsilon0Estimate {
  double norm = 0.0;           ///< power-iteration estimate of ||Lap^{-1}(I-P)||
  double safety_factor = 1.1;
  double epsilon0 = 0.0;       ///< norm * safety_factor
  Eigen::VectorXd direction;   ///< dominant direction, in V, unit L2 norm
  int iterations = 0;
};

struct Epsilon0Options {
  double safety_factor = 1.1;
  int block = 4;
  int max_iter = 400;
  double tol = 1e-10;
  std::uint64_t seed = 777;
};

/// `basis` holds mass-orthonormal nodal columns spanning U (may be empty).
Epsilon0Estimate estimate_epsilon0(const EllipticSolver& solver, const Eigen::MatrixXd& basis,
                                   const Epsilon0Options& opts = {});

}  // namespace vortcert
