#include <doctest.h>

#include <random>

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fixtures.hpp"
#include "vortcert/certificate.hpp"
#include "vortcert/constants.hpp"
#include "vortcert/error.hpp"

using namespace vortcert;

namespace {

SupBounds radial_bounds() {
  SupBounds b;
  b.M = 2.1;
  b.sup_q = 2.0;
  b.sup_Dq = 1.0;
  b.sup_q_sigma1 = 2.0;
  b.inf_nq_sigma1 = 2.0;
  return b;
}

// Radial annulus numbers with h scaled by 1e-8.
CertifyInputs radial_inputs() {
  CertifyInputs in;
  in.mu = 1.0;
  in.bounds = radial_bounds();
  in.h_norms = {1e-8, 0.0};
  in.transversality.c1 = 0.5;
  in.transversality.T_star = std::log(4.0);
  in.transversality.T_max = 100.0;
  in.transversality.samples_checked = 64;
  in.normal_lipschitz = 0.0;
  in.corridor = 1.5;
  in.lambda1 = 2.0;
  in.epsilon0.norm = 0.05;
  in.epsilon0.epsilon0 = 0.055;
  in.gamma = GammaBound{1.0, 1.0};
  in.A_norm = 0.0;
  in.B_U = 1.0;
  in.rho = 0.75;
  in.C2 = 10.0;
  in.delta2 = [](double, double cap) { return Delta2Result{cap, 0.0, 1}; };
  in.seed = 42;
  in.config_hash = "abc";
  return in;
}

}  // namespace

TEST_CASE("C tilde") {
  const SupBounds b = radial_bounds();
  CHECK(compute_C_tilde(b, {1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(compute_C_tilde(b, {0.0, 0.0}) == 0.0);
  CHECK(compute_C_tilde(b, {2.0, 0.0}) == doctest::Approx(1.0));
  // derivative term carries 1 + sup|q| / inf|<n,q>|
  CHECK(compute_C_tilde(b, {0.0, 1.0}) == doctest::Approx(2.0));
  SupBounds bad = b;
  bad.inf_nq_sigma1 = 0.0;
  CHECK_THROWS_AS(compute_C_tilde(bad, {1.0, 0.0}), Error);
}

TEST_CASE("boundary norms of a constant profile") {
  const BoundaryNorms n = boundary_norms(BoundaryProfile::constant(1.0));
  CHECK(n.h_c0 == doctest::Approx(1.0));
  CHECK(n.dh_c0 == doctest::Approx(0.0));
}

TEST_CASE("K: closed form") {
  CHECK(K_of(3.0, 0.0, 1.0) == 0.0);
  CHECK(K_of(0.0, std::log(2.0), 1.0) == doctest::Approx(2.0 * std::sqrt(1.75 / 6.0)).epsilon(1e-14));
  CHECK(K_of(0.0, std::log(2.0), 1.0) == doctest::Approx(1.0801).epsilon(1e-4));
}

TEST_CASE("kappa agrees with quadrature of its defining integral") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uM(0.0, 3.0), ut(0.01, 3.0), umu(0.6, 2.0);
  for (int i = 0; i < 20; ++i) {
    const double M = uM(rng), t = ut(rng), mu = umu(rng);
    auto f = [&](double s) { return 0.5 * std::exp((2.0 * M + 1.0) * s - 2.0 * mu * (t - s)); };
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 10, 1e-14);
    CHECK(std::abs(kappa_of(M, t, mu) - q) / q <= 1e-10);
  }
}

TEST_CASE("K is nondecreasing in M and t") {
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double M = 0.2 * i, t = 0.15 * j;
      CHECK(K_of(M + 0.2, t, 1.0) >= K_of(M, t, 1.0));
      CHECK(K_of(M, t + 0.15, 1.0) >= K_of(M, t, 1.0));
    }
}

TEST_CASE("kappa0") {
  CHECK(kappa0(0.0, 2.1, 0.1, std::log(4.0), 1.0, 2.0).kappa0 == 0.0);
  const double t = std::log(4.0) + 1.0;
  const double kap = (std::exp(5.4 * t) - std::exp(-2.0 * t)) / (4.0 * 2.2 + 4.0 + 2.0);
  const Kappa0 k = kappa0(0.5, 2.1, 0.1, std::log(4.0), 1.0, 2.0);
  CHECK(k.kappa0 == doctest::Approx(0.5 * std::exp(t) * std::sqrt(kap)).epsilon(1e-13));
  CHECK(k.over_lambda1 == doctest::Approx(k.kappa0 / 2.0));
  CHECK(kappa0(0.5, 2.1, 0.2, std::log(4.0), 1.0, 2.0).kappa0 > k.kappa0);
}

TEST_CASE("Holder seminorm") {
  const auto m = fx::unit_disc(0.02);
  CHECK(holder_seminorm(ScalarField::interpolate(m, [](const Vec2&) { return 3.0; }), 0.5, 0.1) == 0.0);
  const ScalarField x1 = ScalarField::interpolate(m, [](const Vec2& x) { return x.x(); });
  const double s = holder_seminorm(x1, 0.5, 0.1);
  CHECK(s <= std::sqrt(0.1) + 1e-12);
  CHECK(s >= 0.98 * std::sqrt(0.1));
  ScalarField two = x1;
  two.values *= 2.0;
  CHECK(holder_seminorm(two, 0.5, 0.1) == doctest::Approx(2.0 * s).epsilon(1e-14));
}

TEST_CASE("delta_c: limits, homogeneity, monotonicity") {
  CHECK(delta_c(1.0, 0.5, 1e-12, 1.0) < 1e-8);
  const double a = delta_c(0.75, 0.5, 0.3, 1.0);
  CHECK(delta_c(0.75, 0.5, 0.3, 2.0) == doctest::Approx(2.0 * a).epsilon(1e-12));
  double prev = 0.0;
  for (double d : {0.01, 0.05, 0.1, 0.3, 0.6, 0.99}) {
    const double v = delta_c(0.75, 0.5, d, 1.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("delta_c matches Monte-Carlo integration") {
  const double rho = 1.0, c = 1.0, peak = 0.5;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 1'000'000;
  double s1 = 0.0, s2 = 0.0;
  int kept = 0;
  while (kept < n) {
    const Vec2 z(u(rng), u(rng));
    if (z.squaredNorm() > 1.0) continue;
    ++kept;
    const Vec2 x = Vec2(rho, 0.0) + rho * z;
    const double p = std::max(0.0, peak - c * std::sqrt(x.norm()));
    s1 += p * p;
    s2 += p * p * p * p;
  }
  const double area = std::numbers::pi * rho * rho;
  const double mean = s1 / n, var = s2 / n - mean * mean;
  const double I = area * mean, sI = area * std::sqrt(var / n);
  const double est = std::sqrt(I), sigma = sI / (2.0 * est);
  CHECK(std::abs(delta_c(rho, 0.5, 1.0, c) - est) <= 3.0 * sigma);
}

TEST_CASE("delta1 margin") {
  Delta1Inputs in{0.5, std::log(4.0), 1e-6, 0.0, 1.5};
  const Delta1Result r = delta1_margin(in);
  CHECK(r.delta1 >= 1.0 / 16.0);
  CHECK(r.delta1 <= 1.0);
  // first candidate with 0.5 - d >= 0.25
  CHECK(r.delta1 == 0.25);
  in.c1 = 0.0;
  CHECK_THROWS_AS(delta1_margin(in), Error);
  in.c1 = 1e-9;
  CHECK_THROWS_AS(delta1_margin(in), Error);
  in = {10.0, 0.1, 0.0, 0.0, 100.0};
  CHECK(delta1_margin(in).delta1 == 1.0);
}

TEST_CASE("C1 bound") {
  C1Inputs in{std::log(4.0), 2.1, 0.0, 0.0, 3.0, 2.0, 5.0};
  CHECK(C1_bound(in) == 0.0);
  const double t = std::log(4.0) + 1.0;
  in = {std::log(4.0), 2.1, 0.5, 1.0, 1.0, 0.0, 0.0};
  const double core = std::exp(t) + 0.5 * std::exp(t * 4.1);
  CHECK(C1_core(in) == doctest::Approx(core).epsilon(1e-14));
  CHECK(C1_bound(in) == doctest::Approx(core).epsilon(1e-14));
  in.gamma = 2.0;
  in.A_norm = 0.5;
  in.B_U = 3.0;
  CHECK(C1_bound(in) == doctest::Approx((1.0 + 2.0 * 1.5 * 3.0) * core).epsilon(1e-14));
}

TEST_CASE("holder window") {
  CHECK(holder_window(0.0, 10.0, 0.5) == 0.99);
  CHECK(holder_window(1.0, 10.0, 0.5) == doctest::Approx(1.0 / 1600.0));
  CHECK(holder_window(1e-6, 1.0, 1.0) == 0.99);
}

TEST_CASE("A3 check and eta0") {
  CHECK(check_A3(0.0, 0.3, 2.0, 100.0).pass);
  const CheckRecord r = check_A3(1.0, 1.0, 1.0, 1.0);
  CHECK(r.lhs == doctest::Approx(2.0));
  CHECK(r.rhs == doctest::Approx(0.5));
  CHECK_FALSE(r.pass);
  CHECK(eta0_from(2.0, 0.1) == doctest::Approx(0.2));
  CHECK(eta0_from(2.0, 1.0) == 1.0);
}

TEST_CASE("star operator norm of dominated block matrices") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  auto block = [&](int r, int c, double bound) {
    Eigen::MatrixXd B(r, c);
    for (auto& x : B.reshaped()) x = nd(rng);
    return Eigen::MatrixXd(B * (bound * ud(rng) / Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues()[0]));
  };
  const double k0 = 0.8, eps0 = 0.02, l1 = 5.0;
  const double eta0 = eta0_from(l1, eps0);
  for (int t = 0; t < 20; ++t) {
    const double n = star_operator_norm(block(4, 4, k0 * eps0), block(4, 7, k0 * eps0), block(7, 4, k0 / l1),
                                        block(7, 7, k0 * eps0), eta0);
    CHECK(n <= block_bound(k0, eps0, l1) + 1e-9);
  }
  // eta0 = 1 reduces to the spectral norm
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  CHECK(star_operator_norm(2.0 * I2, 0.0 * I2, 0.0 * I2, I2, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("ledger bookkeeping") {
  ConstantsLedger L;
  L.set("a", 1.0, Provenance::analytic_formula);
  L.set("a", 2.0, Provenance::sampled_bound);
  CHECK(L.entries().size() == 1);
  CHECK(L.value("a") == 2.0);
  CHECK(L.missing({"a", "b"}) == std::vector<std::string>{"b"});
  CHECK_THROWS_AS(L.value("b"), Error);
}

TEST_CASE("certify: radial inputs pass conditionally") {
  const Certificate c = certify(radial_inputs());
  CHECK(c.failing().empty());
  CHECK(c.verdict == Verdict::conditionally_certified);
  REQUIRE(c.conclusion_delta2);
  CHECK(*c.conclusion_delta2 == doctest::Approx(c.ledger.value("delta_c")));
  CHECK(c.ledger.missing(required_constants()).empty());
  CHECK(c.ledger.value("C_tilde") == doctest::Approx(0.5e-8));
  CHECK(c.ledger.find("C2")->provenance == Provenance::user_supplied);
  CHECK_FALSE(c.accepted());
  Acknowledgments acks{true, true};
  CertifyInputs in = radial_inputs();
  in.acks = acks;
  CHECK(certify(in).accepted());
}

TEST_CASE("certify: inflated residual fails only the theorem hypothesis") {
  CertifyInputs in = radial_inputs();
  in.upsilon_residual = 1.0;
  const Certificate c = certify(in);
  CHECK(c.verdict == Verdict::failed);
  CHECK(c.failing() == std::vector<std::string>{"theorem_hypothesis"});
  CHECK_FALSE(c.conclusion_delta2);
}

TEST_CASE("certify: lost transversality stops at the first check") {
  CertifyInputs in = radial_inputs();
  in.transversality.c1 = -0.1;
  const Certificate c = certify(in);
  CHECK(c.failing() == std::vector<std::string>{"transversality"});
  CHECK(c.checks.size() == 1);
}

TEST_CASE("certify: zero data certifies the zero solution") {
  CertifyInputs in = radial_inputs();
  in.h_zero = true;
  in.h_norms = {0.0, 0.0};
  in.delta2 = nullptr;
  const Certificate c = certify(in);
  CHECK(c.verdict == Verdict::certified);
  CHECK(c.ledger.value("C_tilde") == 0.0);
  CHECK(c.ledger.value("kappa0") == 0.0);
  REQUIRE(c.conclusion_delta2);
  CHECK(*c.conclusion_delta2 == c.ledger.value("delta_c"));
}

TEST_CASE("certificate JSON round trip") {
  CertifyInputs in = radial_inputs();
  in.upsilon_residual = 1e-12;
  const Certificate c = certify(in);
  const std::string j = certificate_json(c);
  const Certificate back = parse_certificate_json(j);
  CHECK(certificate_json(back) == j);
  CHECK(back.verdict == c.verdict);
  CHECK(back.seed == 42);
  CHECK(back.ledger.value("delta1") == c.ledger.value("delta1"));
  CHECK_THROWS_AS(parse_certificate_json("{"), Error);
  CHECK(certificate_text(c).find("conditionally-certified") != std::string::npos);
}

TEST_CASE("perturbation bound audit on the radial field") {
  const auto m = fx::annulus(0.1);
  const VelocityField q = VelocityField::linear(m, 1.0);
  const BoundaryProfile h = BoundaryProfile::constant(1.0);
  const SupBounds b = sup_bounds(q, h);
  const Lemma31Audit a = lemma31_audit(q, h, 0.5, b.M, std::log(4.0), 8, 3, TraceOptions{});
  CHECK(a.perturbations == 8);
  CHECK(a.ratios.size() == 8);
  CHECK(a.max_ratio > 0.0);
  CHECK(a.max_ratio < 1.0);
  CHECK(a.pass());
  const Lemma31Audit none = lemma31_audit(q, h, 0.5, b.M, std::log(4.0), 0, 3, TraceOptions{});
  CHECK(none.max_ratio == 0.0);
}

TEST_CASE("delta2 search") {
  const auto s = fx::solver(fx::annulus(0.1));
  SpaceOptions so;
  so.n_eigen = 4;
  const GalerkinSpace sp = build_space(s, BasisKind::mixed_eigen, BoundaryProfile::constant(1.0), so);
  const LambdaContext ctx = fx::radial_context(s, 1e-3);
  const Eigen::VectorXd omega0 = Eigen::VectorXd::Zero(s->mesh()->num_vertices());
  const Eigen::MatrixXd A = assemble_A(sp, omega0, ctx).entries;
  Delta2Options o;
  o.n_probes = 2;
  o.halvings = 6;
  o.bisections = 6;

  // loose tolerance: the Jacobian barely moves, so the cap is attained
  const Delta2Result loose = delta2_estimate(sp, omega0, A, 1.0, 0.01, Eigen::VectorXd(), ctx, o);
  CHECK(loose.delta2 == 0.01);

  CHECK_THROWS_AS(delta2_estimate(sp, omega0, A, 0.0, 0.5, Eigen::VectorXd(), ctx, o), Error);

  const Delta2Result at_cap = delta2_estimate(sp, omega0, A, 1e9, 0.5, Eigen::VectorXd(), ctx, o);
  const double g = at_cap.worst_gap;
  REQUIRE(g > 0.0);
  const double r1 = delta2_estimate(sp, omega0, A, 0.1 * g, 0.5, Eigen::VectorXd(), ctx, o).delta2;
  const double r2 = delta2_estimate(sp, omega0, A, 0.3 * g, 0.5, Eigen::VectorXd(), ctx, o).delta2;
  CHECK(r1 > 0.0);
  CHECK(r1 < 0.5);
  CHECK(r2 >= r1);
}
