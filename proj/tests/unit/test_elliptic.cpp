#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"

using namespace vortcert;
using std::numbers::pi;

namespace {

double l2_error(const EllipticSolver& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return s.l2_norm(a - b);
}

// (|x|^2 - 1/4)(4 - |x|^2) and its Laplacian 17 - 16|x|^2.
double manufactured(const Vec2& x) {
  const double s = x.squaredNorm();
  return (s - 0.25) * (4.0 - s);
}
double manufactured_rhs(const Vec2& x) { return 17.0 - 16.0 * x.squaredNorm(); }

// relative L2 error
double manufactured_error(double h) {
  const auto s = fx::solver(fx::annulus(h));
  const ScalarField rhs = ScalarField::interpolate(s->mesh(), manufactured_rhs);
  const ScalarField exact = ScalarField::interpolate(s->mesh(), manufactured);
  return l2_error(*s, s->solve_poisson_dirichlet(rhs).values, exact.values) / s->l2_norm(exact.values);
}

}  // namespace

TEST_CASE("Poisson on the unit disc: rhs 4 gives |x|^2 - 1") {
  double prev = 0.0;
  for (double h : {0.1, 0.05}) {
    const auto s = fx::solver(fx::unit_disc(h));
    const ScalarField rhs = ScalarField::interpolate(s->mesh(), [](const Vec2&) { return 4.0; });
    const ScalarField phi = s->solve_poisson_dirichlet(rhs);
    double err = 0.0;
    for (std::size_t v = 0; v < s->mesh()->num_vertices(); ++v) {
      const Vec2& x = s->mesh()->vertices()[v];
      err = std::max(err, std::abs(phi.values[v] - (x.squaredNorm() - 1.0)));
      if (s->is_boundary(static_cast<int>(v))) CHECK(phi.values[v] == 0.0);
    }
    CHECK(err < 2.0 * h * h);
    if (prev > 0.0) CHECK(prev / err > 3.0);
    prev = err;
    CHECK(s->poisson_residual(phi.values, rhs.values) < 1e-10);
  }
}

TEST_CASE("Poisson with zero rhs is exactly zero") {
  const auto s = fx::solver(fx::annulus(0.1));
  const ScalarField z = s->solve_poisson_dirichlet(ScalarField::zeros(s->mesh()));
  CHECK(fx::max_abs(z.values) == 0.0);
}

TEST_CASE("manufactured annulus solution converges at second order") {
  const double e1 = manufactured_error(0.1);
  const double e2 = manufactured_error(0.05);
  CHECK(e2 < 5e-3);
  CHECK(e1 / e2 >= 3.3);
  CHECK(e1 / e2 <= 4.7);
}

TEST_CASE("harmonic extension oracles") {
  const auto s = fx::solver(fx::annulus(0.05));
  SUBCASE("constants are harmonic") {
    const ScalarField c = s->solve_harmonic_extension([](BoundaryLabel, const Vec2&) { return 3.5; });
    CHECK((c.values.array() - 3.5).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("a + b ln r") {
    const ScalarField f = s->solve_harmonic_extension(
        [](BoundaryLabel l, const Vec2&) { return l == BoundaryLabel::sigma1 ? 1.0 : 0.0; });
    double err = 0.0;
    for (std::size_t v = 0; v < s->mesh()->num_vertices(); ++v) {
      const double r = s->mesh()->vertices()[v].norm();
      err = std::max(err, std::abs(f.values[v] - std::log(r / 0.5) / std::log(4.0)));
    }
    CHECK(err < 1e-3);
  }
  SUBCASE("stream data with Fourier modes matches boundary values") {
    StreamBoundaryData g;
    g.sigma1 = {0.3, {{2, 0.5, -0.1}}};
    g.sigma2 = {-0.2, {}};
    const ScalarField f = s->solve_harmonic_extension(g);
    for (std::size_t v = 0; v < s->mesh()->num_vertices(); ++v) {
      const Vec2& x = s->mesh()->vertices()[v];
      const double th = std::atan2(x.y(), x.x());
      if (s->mesh()->vertex_flags()[v] == VertexFlag::sigma1)
        CHECK(f.values[v] == doctest::Approx(g.sigma1.value(th)).epsilon(1e-12));
      if (s->mesh()->vertex_flags()[v] == VertexFlag::sigma2) CHECK(f.values[v] == doctest::Approx(-0.2));
    }
  }
}

TEST_CASE("harmonic extension reproduces x1 on the disc") {
  const auto s = fx::solver(fx::unit_disc(0.1));
  const ScalarField f = s->solve_harmonic_extension([](BoundaryLabel, const Vec2& x) { return x.x(); });
  for (std::size_t v = 0; v < s->mesh()->num_vertices(); ++v)
    CHECK(f.values[v] == doctest::Approx(s->mesh()->vertices()[v].x()).epsilon(1e-10));
}

TEST_CASE("perp gradient") {
  const auto m = fx::annulus(0.1);
  const auto px = perp_gradient(ScalarField::interpolate(m, [](const Vec2& x) { return x.x(); }));
  const auto py = perp_gradient(ScalarField::interpolate(m, [](const Vec2& x) { return x.y(); }));
  for (std::size_t t = 0; t < m->num_triangles(); ++t) {
    CHECK((px.values[t] - Vec2(0.0, 1.0)).norm() < 1e-12);
    CHECK((py.values[t] - Vec2(-1.0, 0.0)).norm() < 1e-12);
  }
  const Eigen::MatrixX2d rec = recovered_perp_gradient(ScalarField::interpolate(m, [](const Vec2& x) {
    return 2.0 * x.x() - x.y();
  }));
  CHECK((rec.rowwise() - Eigen::RowVector2d(1.0, 2.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("perp gradient of the disc Poisson solution is first order") {
  double prev = 0.0;
  for (double h : {0.1, 0.05}) {
    const auto s = fx::solver(fx::unit_disc(h));
    const ScalarField rhs = ScalarField::interpolate(s->mesh(), [](const Vec2&) { return 4.0; });
    const auto pg = perp_gradient(s->solve_poisson_dirichlet(rhs));
    double err = 0.0;
    for (std::size_t t = 0; t < s->mesh()->num_triangles(); ++t) {
      const Vec2 c = s->mesh()->centroid(static_cast<int>(t));
      err = std::max(err, (pg.values[t] - Vec2(-2.0 * c.y(), 2.0 * c.x())).norm());
    }
    CHECK(err < 3.0 * h);
    if (prev > 0.0) CHECK(prev / err > 1.6);
    prev = err;
  }
}

TEST_CASE("l2 inner product") {
  const auto s = fx::solver(fx::annulus(0.05));
  const ScalarField one = ScalarField::interpolate(s->mesh(), [](const Vec2&) { return 1.0; });
  CHECK(s->l2_inner(one, one) == doctest::Approx(3.75 * pi).epsilon(2e-3));
  const ScalarField f = ScalarField::interpolate(s->mesh(), [](const Vec2& x) { return x.x() * x.y(); });
  CHECK(s->l2_inner(f, f) > 0.0);
  CHECK(s->l2_inner(f, one) == doctest::Approx(s->l2_inner(one, f)));
  CHECK(s->l2_inner(ScalarField::zeros(s->mesh()), f) == 0.0);
}

TEST_CASE("inverse Laplacian is self-adjoint and bounded by 1/lambda1") {
  const auto s = fx::solver(fx::annulus(0.1));
  const double lambda1 = eigenpairs(*s, BcKind::dirichlet_all, 1).eigenvalues.front();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  const auto n = static_cast<Eigen::Index>(s->mesh()->num_vertices());
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd f(n), g(n);
    for (auto& x : f) x = nd(rng);
    for (auto& x : g) x = nd(rng);
    const Eigen::VectorXd lf = s->poisson(f), lg = s->poisson(g);
    const double a = s->l2_inner(lf, g), b = s->l2_inner(f, lg);
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
    CHECK(s->l2_norm(lf) <= s->l2_norm(f) / lambda1 * (1.0 + 1e-9));
  }
}

TEST_CASE("eigenpairs: orthonormal, Rayleigh-consistent, ascending") {
  const auto s = fx::solver(fx::annulus(0.1));
  for (BcKind bc : {BcKind::dirichlet_all, BcKind::mixed}) {
    const EigenSystem es = eigenpairs(*s, bc, 8);
    REQUIRE(es.eigenvalues.size() == 8);
    CHECK(es.eigenvalues.front() > 0.0);
    for (int i = 0; i < 8; ++i) {
      if (i > 0) CHECK(es.eigenvalues[i] >= es.eigenvalues[i - 1]);
      const Eigen::VectorXd& p = es.eigenfields[i].values;
      const double rq = p.dot(s->stiffness() * p) / p.dot(s->mass() * p);
      CHECK(rq == doctest::Approx(es.eigenvalues[i]).epsilon(1e-8));
      for (int j = 0; j <= i; ++j) {
        const double ip = s->l2_inner(es.eigenfields[i], es.eigenfields[j]);
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
    }
  }
}

TEST_CASE("annulus lambda1 against a dense solve on the refined mesh") {
  const double coarse = eigenpairs(*fx::solver(fx::annulus(0.2)), BcKind::dirichlet_all, 1).eigenvalues[0];
  const auto fine = fx::solver(fx::annulus(0.1));
  const auto& I = fine->interior();
  const auto ni = static_cast<Eigen::Index>(I.size());
  Eigen::MatrixXd K(ni, ni), M(ni, ni);
  const Eigen::MatrixXd Kd(fine->stiffness()), Md(fine->mass());
  for (Eigen::Index a = 0; a < ni; ++a)
    for (Eigen::Index b = 0; b < ni; ++b) {
      K(a, b) = Kd(I[a], I[b]);
      M(a, b) = Md(I[a], I[b]);
    }
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(K, M, Eigen::EigenvaluesOnly);
  const double dense = ges.eigenvalues()(0);
  CHECK(coarse == doctest::Approx(dense).epsilon(0.02));
  // conforming P1: discrete eigenvalues decrease toward the limit
  CHECK(coarse >= dense);
}

TEST_CASE("epsilon0 spectral identities") {
  const auto s = fx::solver(fx::annulus(0.1));
  const EigenSystem es = eigenpairs(*s, BcKind::dirichlet_all, 11);
  const auto n = static_cast<Eigen::Index>(s->mesh()->num_vertices());
  SUBCASE("empty U gives 1/lambda1") {
    const Epsilon0Estimate e = estimate_epsilon0(*s, Eigen::MatrixXd(n, 0));
    CHECK(e.norm == doctest::Approx(1.0 / es.eigenvalues[0]).epsilon(0.05));
    CHECK(e.epsilon0 == doctest::Approx(1.1 * e.norm));
  }
  SUBCASE("first 10 eigenfields give 1/lambda11") {
    Eigen::MatrixXd B(n, 10);
    for (int j = 0; j < 10; ++j) B.col(j) = es.eigenfields[j].values;
    const Epsilon0Estimate e = estimate_epsilon0(*s, B);
    CHECK(e.norm == doctest::Approx(1.0 / es.eigenvalues[10]).epsilon(0.05));
    // the dominant direction lies in V
    CHECK((B.transpose() * (s->mass() * e.direction)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("epsilon0 vanishes when U is the whole discrete space") {
  const auto s = fx::solver(fx::annulus(0.4));
  const auto n = static_cast<Eigen::Index>(s->mesh()->num_vertices());
  // mass-orthonormal basis of every nodal function
  const Eigen::MatrixXd M(s->mass());
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  const Eigen::MatrixXd B = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
  const Epsilon0Estimate e = estimate_epsilon0(*s, B);
  CHECK(e.epsilon0 <= 1e-10);
}
