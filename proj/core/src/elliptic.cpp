#include "vortcert/elliptic.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "vortcert/error.hpp"

namespace vortcert {

struct EllipticSolver::Factor {
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

ScalarField ScalarField::zeros(MeshPtr mesh, std::string name) {
  const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
  return {std::move(mesh), Eigen::VectorXd::Zero(n), std::move(name)};
}

ScalarField ScalarField::interpolate(MeshPtr mesh, const std::function<double(const Vec2&)>& f,
                                     std::string name) {
  ScalarField s = zeros(mesh, std::move(name));
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) s.values[i] = f(mesh->vertices()[i]);
  return s;
}

double ScalarField::operator()(const Vec2& x) const {
  const Location loc = mesh->locate(x);
  const auto& tri = mesh->triangles()[loc.triangle];
  return loc.bary[0] * values[tri[0]] + loc.bary[1] * values[tri[1]] + loc.bary[2] * values[tri[2]];
}

std::string to_string(BcKind bc) { return bc == BcKind::mixed ? "mixed" : "dirichlet-all"; }

EllipticSolver::EllipticSolver(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  const int nv = static_cast<int>(m.num_vertices());
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * m.num_triangles());
  mt.reserve(9 * m.num_triangles());
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const auto& tri = m.triangles()[t];
    const double a = m.area(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(tri[i], tri[j], a * m.bary_gradient(t, i).dot(m.bary_gradient(t, j)));
        mt.emplace_back(tri[i], tri[j], a * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
      }
    }
  }
  K_.resize(nv, nv);
  M_.resize(nv, nv);
  K_.setFromTriplets(kt.begin(), kt.end());
  M_.setFromTriplets(mt.begin(), mt.end());

  interior_index_.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (m.vertex_flags()[v] == VertexFlag::interior) {
      interior_index_[v] = static_cast<int>(interior_.size());
      interior_.push_back(v);
    } else {
      boundary_.push_back(v);
    }
  }
  std::vector<int> boundary_index(nv, -1);
  for (std::size_t i = 0; i < boundary_.size(); ++i) boundary_index[boundary_[i]] = static_cast<int>(i);

  std::vector<Eigen::Triplet<double>> ii, ib;
  for (int c = 0; c < K_.outerSize(); ++c) {
    for (SpMat::InnerIterator it(K_, c); it; ++it) {
      const int r = interior_index_[it.row()];
      if (r < 0) continue;
      const int ci = interior_index_[it.col()];
      if (ci >= 0)
        ii.emplace_back(r, ci, it.value());
      else
        ib.emplace_back(r, boundary_index[it.col()], it.value());
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior_.size());
  K_II_.resize(ni, ni);
  K_IB_.resize(ni, static_cast<Eigen::Index>(boundary_.size()));
  K_II_.setFromTriplets(ii.begin(), ii.end());
  K_IB_.setFromTriplets(ib.begin(), ib.end());

  factor_ = std::make_shared<Factor>();
  if (ni > 0) {
    factor_->ldlt.compute(K_II_);
    if (factor_->ldlt.info() != Eigen::Success)
      fail(ErrorKind::SolverFailure, "factorization of the interior stiffness matrix failed");
  }
}

Eigen::MatrixXd EllipticSolver::poisson(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != static_cast<Eigen::Index>(mesh_->num_vertices()))
    fail(ErrorKind::MeshMismatch, "rhs length differs from vertex count");
  const Eigen::MatrixXd Mf = M_ * rhs;
  Eigen::MatrixXd b(static_cast<Eigen::Index>(interior_.size()), rhs.cols());
  for (std::size_t i = 0; i < interior_.size(); ++i) b.row(i) = -Mf.row(interior_[i]);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rhs.rows(), rhs.cols());
  if (interior_.empty()) return out;
  const Eigen::MatrixXd x = factor_->ldlt.solve(b);
  if (factor_->ldlt.info() != Eigen::Success) fail(ErrorKind::SolverFailure, "Poisson solve failed");
  for (std::size_t i = 0; i < interior_.size(); ++i) out.row(interior_[i]) = x.row(i);
  return out;
}

Eigen::VectorXd EllipticSolver::poisson(const Eigen::VectorXd& rhs) const {
  Eigen::MatrixXd r = rhs;
  return poisson(r).col(0);
}

ScalarField EllipticSolver::solve_poisson_dirichlet(const ScalarField& rhs) const {
  if (rhs.mesh != mesh_) fail(ErrorKind::MeshMismatch, "rhs lives on a different mesh");
  return {mesh_, poisson(rhs.values), "phi"};
}

double EllipticSolver::poisson_residual(const Eigen::VectorXd& phi, const Eigen::VectorXd& rhs) const {
  const Eigen::VectorXd r = K_ * phi + M_ * rhs;
  const Eigen::VectorXd b = M_ * rhs;
  double num = 0.0, den = 0.0;
  for (int v : interior_) {
    num += r[v] * r[v];
    den += b[v] * b[v];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

ScalarField EllipticSolver::solve_harmonic_extension(
    const std::function<double(BoundaryLabel, const Vec2&)>& g, std::string name) const {
  const Mesh& m = *mesh_;
  ScalarField out = ScalarField::zeros(mesh_, std::move(name));
  Eigen::VectorXd gb(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    const int v = boundary_[i];
    const BoundaryLabel label =
        m.vertex_flags()[v] == VertexFlag::sigma1 ? BoundaryLabel::sigma1 : BoundaryLabel::sigma2;
    gb[i] = g(label, m.vertices()[v]);
    out.values[v] = gb[i];
  }
  if (interior_.empty()) return out;
  const Eigen::VectorXd x = factor_->ldlt.solve(-(K_IB_ * gb));
  if (factor_->ldlt.info() != Eigen::Success)
    fail(ErrorKind::SolverFailure, "harmonic extension solve failed");
  for (std::size_t i = 0; i < interior_.size(); ++i) out.values[interior_[i]] = x[i];
  return out;
}

ScalarField EllipticSolver::solve_harmonic_extension(const StreamBoundaryData& g) const {
  return solve_harmonic_extension([&](BoundaryLabel label, const Vec2& x) {
    const double th = std::atan2(x.y(), x.x());
    return label == BoundaryLabel::sigma1 ? g.sigma1.value(th) : g.sigma2.value(th);
  });
}

double EllipticSolver::l2_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  if (f.size() != M_.rows() || g.size() != M_.rows())
    fail(ErrorKind::MeshMismatch, "field length differs from vertex count");
  return f.dot(M_ * g);
}

double EllipticSolver::l2_inner(const ScalarField& f, const ScalarField& g) const {
  if (f.mesh != mesh_ || g.mesh != mesh_) fail(ErrorKind::MeshMismatch, "fields on different meshes");
  return l2_inner(f.values, g.values);
}

double EllipticSolver::l2_norm(const Eigen::VectorXd& f) const {
  return std::sqrt(std::max(0.0, l2_inner(f, f)));
}

ElementwiseVectorField gradient(const ScalarField& f) {
  const Mesh& m = *f.mesh;
  ElementwiseVectorField out{f.mesh, std::vector<Vec2>(m.num_triangles(), Vec2::Zero())};
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const auto& tri = m.triangles()[t];
    for (int k = 0; k < 3; ++k) out.values[t] += f.values[tri[k]] * m.bary_gradient(t, k);
  }
  return out;
}

ElementwiseVectorField perp_gradient(const ScalarField& f) {
  ElementwiseVectorField g = gradient(f);
  for (auto& v : g.values) v = Vec2(-v.y(), v.x());
  return g;
}

Eigen::MatrixX2d recovered_perp_gradient(const Mesh& m, const Eigen::VectorXd& f) {
  const auto nv = static_cast<Eigen::Index>(m.num_vertices());
  Eigen::MatrixX2d acc = Eigen::MatrixX2d::Zero(nv, 2);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(nv);
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const auto& tri = m.triangles()[t];
    Vec2 g = Vec2::Zero();
    for (int k = 0; k < 3; ++k) g += f[tri[k]] * m.bary_gradient(t, k);
    const double a = m.area(t);
    for (int k = 0; k < 3; ++k) {
      acc(tri[k], 0) += -a * g.y();
      acc(tri[k], 1) += a * g.x();
      w[tri[k]] += a;
    }
  }
  for (Eigen::Index v = 0; v < nv; ++v) acc.row(v) /= w[v];
  return acc;
}

Eigen::MatrixX2d recovered_perp_gradient(const ScalarField& f) {
  return recovered_perp_gradient(*f.mesh, f.values);
}

}  // namespace vortcert
