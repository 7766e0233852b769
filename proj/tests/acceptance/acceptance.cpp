#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/SVD>

#include "vortcert/certificate.hpp"
#include "vortcert/config.hpp"
#include "vortcert/constants.hpp"
#include "vortcert/elliptic.hpp"
#include "vortcert/galerkin.hpp"
#include "vortcert/geometry.hpp"
#include "vortcert/pipeline.hpp"
#include "vortcert/transport.hpp"

namespace fs = std::filesystem;
using namespace vortcert;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

MeshPtr annulus(double h) { return build_mesh(DomainSpec::annulus(2.0, 0.5, h)); }

Vec2 random_annulus_point(std::mt19937_64& rng, double r0 = 0.5, double r1 = 2.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // uniform in area
  const double r = std::sqrt(r0 * r0 + u(rng) * (r1 * r1 - r0 * r0)), th = 2.0 * pi * u(rng);
  return {r * std::cos(th), r * std::sin(th)};
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int r, int c, double norm) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd B(r, c);
  for (auto& x : B.reshaped()) x = n(rng);
  return B * (norm / Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues()[0]);
}

// 1. Gamma(0) = 2/|y| on the radial annulus
Outcome radial_transport() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = annulus(0.05);
  const TransportResult r =
      solve_transport(VelocityField::linear(m, 1.0), BoundaryProfile::constant(1.0), TraceOptions{50.0, 1e-9}, 1);
  double err = 0.0;
  for (std::size_t v = 0; v < m->num_vertices(); ++v)
    err = std::max(err, std::abs(r.omega.values[v] - 2.0 / m->vertices()[v].norm()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {err <= 1e-5 && secs <= 60.0, fmt("max error %.3g, %.1f s, %zu vertices", err, secs, m->num_vertices())};
}

// 2. tau = ln(2/|y|), c1 = 1/2, T* = ln 4
Outcome exit_times() {
  const auto m = annulus(0.1);
  const VelocityField q = VelocityField::linear(m, 1.0);
  const TraceOptions o{50.0, 1e-9};
  std::mt19937_64 rng(2);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 y = random_annulus_point(rng);
    const CharacteristicTrace t = trace(q, y, Direction::backward, o);
    err = std::max(err, std::abs(t.exit_time - std::log(2.0 / y.norm())));
  }
  const TransversalityReport rep = check_transversality(q, BoundaryProfile::constant(1.0), 256, o);
  const double ec = std::abs(rep.c1 - 0.5), et = std::abs(rep.T_star - std::log(4.0));
  return {err <= 1e-8 && ec <= 1e-6 && et <= 1e-8 && rep.pass(),
          fmt("tau error %.3g, c1 error %.3g, T* error %.3g", err, ec, et)};
}

// 3. det of the backward flow map = e^{2 mu t}
Outcome flow_jacobian() {
  const auto m = annulus(0.1);
  const double mu = 1.0;
  const VelocityField q = VelocityField::linear(m, mu);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 y = random_annulus_point(rng);
    // stay inside the domain: t up to the backward exit time, which is at most T* = ln 4
    const double t = u(rng) * std::log(2.0 / y.norm());
    const double d = flow_jacobian_check(q, y, t, TraceOptions{50.0, 1e-10});
    worst = std::max(worst, std::abs(d / std::exp(2.0 * mu * t) - 1.0));
  }
  return {worst <= 1e-5, fmt("max relative error %.3g over 100 samples", worst)};
}

// 4. tangent solve vs Richardson-extrapolated central differences
Outcome tangent_vs_fd() {
  const auto m = annulus(0.1);
  const VelocityField q = VelocityField::linear(m, 1.0);
  const BoundaryProfile h = BoundaryProfile::constant(1.0);
  const TraceOptions o{50.0, 1e-10};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::vector<Eigen::MatrixX2d> fields;
  for (int k = 0; k < 20; ++k) {
    Eigen::Matrix<double, 2, 2> W;
    Eigen::Vector2d a, ph;
    for (auto& x : W.reshaped()) x = n(rng);
    for (auto& x : a) x = n(rng);
    for (auto& x : ph) x = n(rng);
    Eigen::MatrixX2d f(m->num_vertices(), 2);
    for (std::size_t v = 0; v < m->num_vertices(); ++v) {
      const Vec2 z = W * m->vertices()[v];
      f.row(v) << a[0] * std::sin(z[0] + ph[0]), a[1] * std::cos(z[1] + ph[1]);
    }
    fields.push_back(f);
  }
  const Eigen::MatrixXd tan = tangent_field(q, PerturbationSet::from_nodal(fields), h, o);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto central = [&](double e) {
      const auto p = solve_transport(VelocityField(m, e * fields[k], 1.0), h, o).omega.values;
      const auto d = solve_transport(VelocityField(m, -e * fields[k], 1.0), h, o).omega.values;
      return Eigen::VectorXd((p - d) / (2.0 * e));
    };
    const Eigen::VectorXd d1 = central(1e-3), d2 = central(5e-4);
    const Eigen::VectorXd rich = (4.0 * d2 - d1) / 3.0;
    worst = std::max(worst, (tan.col(k) - rich).cwiseAbs().maxCoeff() / rich.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-4, fmt("max relative deviation %.3g over 20 perturbations", worst)};
}

// 5. ||Omega~|| <= C~ K(M, T*) ||q~||_{L2(D*)}
Outcome perturbation_audit() {
  const auto m = annulus(0.1);
  const VelocityField q = VelocityField::linear(m, 1.0);
  const BoundaryProfile h = BoundaryProfile::constant(1.0);
  const TraceOptions o{50.0, 1e-9};
  const SupBounds b = sup_bounds(q, h);
  const TransversalityReport rep = check_transversality(q, h, 256, o);
  const double Ct = compute_C_tilde(b, boundary_norms(h));
  const Lemma31Audit a = lemma31_audit(q, h, Ct, b.M, rep.T_star, 50, 5, o);
  return {a.pass() && a.perturbations == 50 && a.ratios.size() == 50,
          fmt("max ratio %.4g over %zu perturbations", a.max_ratio, a.ratios.size())};
}

// 6. sup bound from the Holder seminorm and L2 norm on constructed cones, and delta_c against Monte Carlo
Outcome holder_sup_bound() {
  const auto m = annulus(0.05);
  const EllipticSolver s(m);
  const double rho = inner_radius(*m).rho;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0, attempts = 0, violations = 0;
  double worst = 0.0;
  while (checked < 100 && attempts < 2000) {
    ++attempts;
    const Vec2 x0 = random_annulus_point(rng, 0.6, 1.9);
    const double delta = 0.3 + 0.4 * u(rng), c0 = 0.5 + 4.5 * u(rng);
    const double p = (0.6 + 0.6 * u(rng)) * 0.5 * c0 * std::sqrt(delta);
    const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
    const ScalarField f = ScalarField::interpolate(
        m, [&](const Vec2& x) { return sign * std::max(0.0, p - c0 * std::sqrt((x - x0).norm())); });
    const double c = holder_seminorm(f, 0.5, delta);
    if (!(c > 0.0) || s.l2_norm(f.values) > delta_c(rho, 0.5, delta, c)) continue;
    ++checked;
    const double lhs = f.values.cwiseAbs().maxCoeff(), rhs = 0.5 * c * std::sqrt(delta);
    worst = std::max(worst, lhs / rhs);
    if (lhs > rhs) ++violations;
  }

  // Monte Carlo in the disc B(rho e1, rho) with rho = 1, delta = 1, c = 1
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  const long n = 10'000'000;
  double s1 = 0.0, s2 = 0.0;
  for (long k = 0; k < n;) {
    const Vec2 z(w(rng), w(rng));
    if (z.squaredNorm() > 1.0) continue;
    ++k;
    const double g = std::max(0.0, 0.5 - std::sqrt((Vec2(1.0, 0.0) + z).norm()));
    s1 += g * g;
    s2 += g * g * g * g;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  const double est = std::sqrt(pi * mean), sigma = pi * std::sqrt(var / n) / (2.0 * est);
  const double dc = delta_c(1.0, 0.5, 1.0, 1.0);
  const double z = std::abs(dc - est) / sigma;
  return {checked == 100 && violations == 0 && z <= 3.0,
          fmt("%d fields checked (%d attempts), max |f| / bound %.3g; delta_c %.6g vs MC %.6g (%.2f sigma)", checked,
              attempts, worst, dc, est, z)};
}

// 7. Poisson O(h^2) and disc lambda_1
Outcome poisson_eigen() {
  auto exact = [](const Vec2& x) { return (x.squaredNorm() - 0.25) * (4.0 - x.squaredNorm()); };
  auto rhs = [](const Vec2& x) { return 17.0 - 16.0 * x.squaredNorm(); };
  std::vector<double> errs;
  for (double h : {0.2, 0.1, 0.05}) {
    const EllipticSolver s(annulus(h));
    const ScalarField e = ScalarField::interpolate(s.mesh(), exact);
    const ScalarField phi = s.solve_poisson_dirichlet(ScalarField::interpolate(s.mesh(), rhs));
    errs.push_back(s.l2_norm(phi.values - e.values));
  }
  const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
  const EllipticSolver disc(build_mesh(DomainSpec::disc(1.0, 0.02)));
  const double l1 = eigenpairs(disc, BcKind::dirichlet_all, 1).eigenvalues.front();
  const double rel = std::abs(l1 / 5.7832 - 1.0);
  const bool ok = r1 >= 3.3 && r1 <= 4.7 && r2 >= 3.3 && r2 <= 4.7 && rel <= 0.01;
  return {ok, fmt("error ratios %.3f %.3f; disc lambda1 %.5f (%.3g relative)", r1, r2, l1, rel)};
}

// 8. ||Lap^{-1}(I-P)|| = 1/lambda_{N+1} for the Dirichlet eigenbasis
Outcome epsilon0_identity() {
  const EllipticSolver s(annulus(0.1));
  const EigenSystem es = eigenpairs(s, BcKind::dirichlet_all, 41);
  const auto nv = static_cast<Eigen::Index>(s.mesh()->num_vertices());
  bool ok = true;
  std::string d;
  for (int N : {10, 20, 40}) {
    Eigen::MatrixXd B(nv, N);
    for (int j = 0; j < N; ++j) B.col(j) = es.eigenfields[j].values;
    const double e = estimate_epsilon0(s, B).norm, ref = 1.0 / es.eigenvalues[N];
    const double rel = std::abs(e / ref - 1.0);
    ok = ok && rel <= 0.05;
    d += fmt("N=%d %.3g; ", N, rel);
  }
  return {ok, "relative deviation " + d};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vortcert_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const fs::path kRadial = fs::path(VORTCERT_SOURCE_DIR) / "configs" / "radial.json";

// 9. contraction and the existence conclusion on the shipped radial fixture
Outcome contraction() {
  const RunConfig cfg = load_config(kRadial);
  const RunReport r = run_certify(cfg, scratch("contraction"));
  const Certificate& c = *r.certificate;
  if (c.verdict == Verdict::failed || !r.iteration) return {false, "certificate verdict failed"};
  const IterationResult& it = *r.iteration;
  double max_ratio = 0.0;
  for (double x : it.ratios) max_ratio = std::max(max_ratio, x);
  const Setup st = prepare(cfg);
  const double dist = st.solver->l2_norm(it.omega_bar - st.omega0);
  const double d2 = c.conclusion_delta2.value_or(0.0);
  const bool ok = it.converged && max_ratio <= 0.5 + 1e-3 && it.final_lambda_residual <= 1e-6 && dist <= d2;
  return {ok, fmt("%s, %zu steps, max ratio %.3g, residual %.3g, |Omega_bar - Omega_0| %.3g <= delta2 %.3g",
                  to_string(c.verdict).c_str(), it.history.size(), max_ratio, it.final_lambda_residual, dist, d2)};
}

// 10. star-operator norm of dominated block matrices
Outcome block_bound_replay() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 12);
  double worst = -1e300;
  for (int t = 0; t < 100; ++t) {
    const double k0 = 0.1 + 5.0 * u(rng), l1 = 1.0 + 20.0 * u(rng);
    const double eps0 = (0.01 + 0.99 * u(rng)) / l1;  // eta0 = l1 eps0 <= 1
    const int nu = dim(rng), nv = dim(rng);
    const double n = star_operator_norm(random_matrix(rng, nu, nu, k0 * eps0 * u(rng)),
                                        random_matrix(rng, nu, nv, k0 * eps0 * u(rng)),
                                        random_matrix(rng, nv, nu, k0 / l1 * u(rng)),
                                        random_matrix(rng, nv, nv, k0 * eps0 * u(rng)), eta0_from(l1, eps0));
    worst = std::max(worst, n - block_bound(k0, eps0, l1));
  }
  return {worst <= 1e-9, fmt("max(norm - bound) %.3g over 100 matrices", worst)};
}

// 11. identical certificates from identical runs
Outcome determinism() {
  const RunConfig cfg = load_config(kRadial);
  const RunReport a = run_certify(cfg, scratch("det_a"));
  const RunReport b = run_certify(cfg, scratch("det_b"));
  const std::string ja = certificate_json(*a.certificate), jb = certificate_json(*b.certificate);
  return {ja == jb, fmt("%zu bytes", ja.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"radial transport oracle", radial_transport},
      {"exit times and transversality margin", exit_times},
      {"flow Jacobian determinant", flow_jacobian},
      {"tangent vs finite differences", tangent_vs_fd},
      {"perturbation bound audit", perturbation_audit},
      {"Holder sup bound and delta_c", holder_sup_bound},
      {"Poisson and eigenvalue accuracy", poisson_eigen},
      {"epsilon0 spectral identity", epsilon0_identity},
      {"contraction and existence conclusion", contraction},
      {"block-bound replay", block_bound_replay},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / ("vortcert_acceptance_" + std::to_string(::getpid())));
  return failed == 0 ? 0 : 1;
}
