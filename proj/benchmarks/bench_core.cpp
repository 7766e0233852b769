#include <benchmark/benchmark.h>

#include <cmath>

#include "vortcert/elliptic.hpp"
#include "vortcert/galerkin.hpp"
#include "vortcert/geometry.hpp"
#include "vortcert/transport.hpp"

using namespace vortcert;

namespace {

MeshPtr annulus(double h) { return build_mesh(DomainSpec::annulus(2.0, 0.5, h)); }

// A non-linear nodal field so traces go through the cellwise integrator.
VelocityField swirl(const MeshPtr& m, double a) {
  Eigen::MatrixX2d n(m->num_vertices(), 2);
  for (std::size_t v = 0; v < m->num_vertices(); ++v) {
    const Vec2& x = m->vertices()[v];
    n.row(v) << -a * x.y() / x.squaredNorm(), a * x.x() / x.squaredNorm();
  }
  return VelocityField(m, n, 1.0);
}

void BM_Mesh(benchmark::State& st) {
  const double h = 1.0 / static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(annulus(h));
}
BENCHMARK(BM_Mesh)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Poisson(benchmark::State& st) {
  const EllipticSolver s(annulus(1.0 / static_cast<double>(st.range(0))));
  const ScalarField rhs = ScalarField::interpolate(s.mesh(), [](const Vec2& x) { return std::sin(x.x()); });
  for (auto _ : st) benchmark::DoNotOptimize(s.solve_poisson_dirichlet(rhs));
}
BENCHMARK(BM_Poisson)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Trace(benchmark::State& st) {
  const VelocityField q = swirl(annulus(0.1), 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(trace(q, Vec2(0.8, 0.3), Direction::backward, {}));
}
BENCHMARK(BM_Trace)->Unit(benchmark::kMicrosecond);

void BM_Transport(benchmark::State& st) {
  const VelocityField q = swirl(annulus(0.1), 0.5);
  const BoundaryProfile h = BoundaryProfile::constant(1.0);
  for (auto _ : st) benchmark::DoNotOptimize(solve_transport(q, h, {}, 1));
}
BENCHMARK(BM_Transport)->Unit(benchmark::kMillisecond);

void BM_TangentField(benchmark::State& st) {
  const auto m = annulus(0.1);
  const VelocityField q = swirl(m, 0.5);
  std::vector<Eigen::MatrixX2d> f(static_cast<std::size_t>(st.range(0)), Eigen::MatrixX2d::Ones(m->num_vertices(), 2));
  const PerturbationSet p = PerturbationSet::from_nodal(f);
  for (auto _ : st) benchmark::DoNotOptimize(tangent_field(q, p, BoundaryProfile::constant(1.0), {}));
}
BENCHMARK(BM_TangentField)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Eigenpairs(benchmark::State& st) {
  const EllipticSolver s(annulus(0.1));
  for (auto _ : st) benchmark::DoNotOptimize(eigenpairs(s, BcKind::mixed, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_Eigenpairs)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
