#include "vortcert/constants.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vortcert/error.hpp"
#include "vortcert/parallel.hpp"

namespace vortcert {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic_formula: return "analytic-formula";
    case Provenance::sampled_bound: return "sampled-bound";
    case Provenance::discrete_estimate: return "discrete-estimate";
    case Provenance::user_supplied: return "user-supplied";
  }
  return "unknown";
}

void ConstantsLedger::set(const std::string& name, double value, Provenance p,
                          std::vector<std::string> inputs) {
  for (auto& e : entries_)
    if (e.name == name) {
      e = {name, value, p, std::move(inputs)};
      return;
    }
  entries_.push_back({name, value, p, std::move(inputs)});
}

const LedgerEntry* ConstantsLedger::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

double ConstantsLedger::value(const std::string& name) const {
  const LedgerEntry* e = find(name);
  if (!e) fail(ErrorKind::LedgerIncomplete, "constant '" + name + "' missing from ledger");
  return e->value;
}

std::vector<std::string> ConstantsLedger::missing(const std::vector<std::string>& required) const {
  std::vector<std::string> out;
  for (const auto& n : required) {
    const LedgerEntry* e = find(n);
    if (!e || !std::isfinite(e->value)) out.push_back(n);
  }
  return out;
}

// ---------------------------------------------------------------------------

BoundaryNorms boundary_norms(const BoundaryProfile& h, int samples) {
  BoundaryNorms n;
  if (h.support_empty()) return n;
  const double lo = h.support_lo(), hi = h.support_hi();
  const int m = std::max(2, samples);
  for (int i = 0; i <= m; ++i) {
    const double th = lo + (hi - lo) * i / m;
    n.h_c0 = std::max(n.h_c0, std::abs(h.value(th)));
    n.dh_c0 = std::max(n.dh_c0, std::abs(h.derivative(th)));
  }
  return n;
}

double compute_C_tilde(const SupBounds& b, const BoundaryNorms& hn) {
  if (hn.h_c0 == 0.0 && hn.dh_c0 == 0.0) return 0.0;
  if (!(b.inf_nq_sigma1 > 0.0))
    fail(ErrorKind::NonTransversal, "<n,q> vanishes on the support of h");
  return hn.h_c0 / b.inf_nq_sigma1 + (1.0 + b.sup_q_sigma1 / b.inf_nq_sigma1) * hn.dh_c0;
}

double kappa_of(double M, double t, double mu) {
  return (std::exp((2.0 * M + 1.0) * t) - std::exp(-2.0 * mu * t)) / (4.0 * M + 4.0 * mu + 2.0);
}

double K_of(double M, double t, double mu) {
  return std::exp(t) * std::sqrt(std::max(0.0, kappa_of(M, t, mu)));
}

Kappa0 kappa0(double C_tilde, double M, double delta1, double T_star, double mu, double lambda1) {
  Kappa0 k;
  k.kappa0 = C_tilde * K_of(M + delta1, T_star + 1.0, mu);
  k.over_lambda1 = k.kappa0 / lambda1;
  return k;
}

// ---------------------------------------------------------------------------

double holder_seminorm(const ScalarField& f, double alpha, double delta) {
  const Mesh& m = *f.mesh;
  const auto& X = m.vertices();
  const int n = static_cast<int>(X.size());
  auto key = [&](long i, long j) { return (i << 32) ^ (j & 0xffffffffL); };
  std::unordered_map<long, std::vector<int>> cells;
  auto cell_of = [&](const Vec2& x) {
    return std::pair<long, long>{static_cast<long>(std::floor(x.x() / delta)),
                                 static_cast<long>(std::floor(x.y() / delta))};
  };
  for (int v = 0; v < n; ++v) {
    const auto [i, j] = cell_of(X[v]);
    cells[key(i, j)].push_back(v);
  }
  double best = 0.0;
  for (int v = 0; v < n; ++v) {
    const auto [i, j] = cell_of(X[v]);
    for (long di = -1; di <= 1; ++di)
      for (long dj = -1; dj <= 1; ++dj) {
        const auto it = cells.find(key(i + di, j + dj));
        if (it == cells.end()) continue;
        for (int w : it->second) {
          if (w <= v) continue;
          const double r = (X[v] - X[w]).norm();
          if (r <= 0.0 || r >= delta) continue;
          best = std::max(best, std::abs(f.values[v] - f.values[w]) / std::pow(r, alpha));
        }
      }
  }
  return best;
}

double delta_c(double rho, double alpha, double delta, double c) {
  // phi is radial around the origin; B passes through the origin, so the
  // circle of radius r < 2 rho meets B in an arc of angle 2 acos(r / 2 rho).
  const double peak = 0.5 * c * std::pow(delta, alpha);
  const double r0 = std::min(delta * std::pow(0.5, 1.0 / alpha), 2.0 * rho);
  if (!(r0 > 0.0) || !(peak > 0.0)) return 0.0;
  // r = r0 u^2 removes the r^alpha kink at the origin for alpha = 1/2
  auto integrand = [&](double u) {
    const double r = r0 * u * u;
    const double p = peak - c * std::pow(r, alpha);
    if (p <= 0.0) return 0.0;
    return p * p * 2.0 * std::acos(std::min(1.0, r / (2.0 * rho))) * r * 2.0 * r0 * u;
  };
  double err = 0.0;
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 12, 1e-13,
                                                                                 &err);
  return std::sqrt(I);
}

// ---------------------------------------------------------------------------

Delta1Result delta1_margin(const Delta1Inputs& in) {
  if (!(in.c1 > 0.0)) fail(ErrorKind::NoMargin, "transversality margin c1 is not positive");
  const double t = in.T_star + 1.0;
  const double G = t * std::exp(in.M * t);
  Delta1Result r;
  double d1 = 1.0;
  for (int k = 0; k <= 20; ++k, d1 *= 0.5) {
    const double lhs = in.c1 - d1 * (1.0 + in.normal_lipschitz * G);
    const double dev = d1 * G;
    if (lhs >= 0.5 * in.c1 && dev <= in.corridor) {
      r.delta1 = d1;
      r.halvings = k;
      r.margin_lhs = lhs;
      r.deviation = dev;
      return r;
    }
  }
  fail(ErrorKind::NoMargin, "no delta1 >= 2^-20 keeps the perturbed field transversal");
}

double corridor_half_width(const Domain& d, const TransversalityReport& rep) {
  double w = std::numeric_limits<double>::infinity();
  const BoundaryCurve& s1 = d.curve(BoundaryLabel::sigma1);
  for (const Vec2& z : rep.exit_points) w = std::min(w, s1.distance(z));
  return w;
}

double basis_c1_bound(const GalerkinSpace& space, double safety) {
  const Mesh& m = *space.solver->mesh();
  double best = 0.0;
  for (int j = 0; j < space.N(); ++j) {
    const Eigen::VectorXd col = space.basis.col(j);
    double s = col.cwiseAbs().maxCoeff();
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
      Vec2 g = Vec2::Zero();
      const auto& tri = m.triangles()[t];
      for (int k = 0; k < 3; ++k) g += col[tri[k]] * m.bary_gradient(t, k);
      s = std::max(s, g.norm());
    }
    best = std::max(best, s);
  }
  return safety * best;
}

double C1_core(const C1Inputs& in) {
  const double t = in.T_star + 1.0;
  return std::exp(t) * in.h_c0 + in.C_tilde * std::exp(t * (in.M + 2.0));
}

double C1_bound(const C1Inputs& in) {
  return (1.0 + in.gamma * (1.0 + in.A_norm) * in.B_U) * C1_core(in);
}

double holder_window(double C1, double C2, double delta1) {
  if (C1 <= 0.0) return 0.99;
  const double s = 2.0 * C1 * C2 / delta1;
  return std::min(0.99, 1.0 / (s * s));
}

// ---------------------------------------------------------------------------

Delta2Result delta2_estimate(const GalerkinSpace& space, const Eigen::VectorXd& omega0,
                             const Eigen::MatrixXd& A, double bound, double cap,
                             const Eigen::VectorXd& v_direction, const LambdaContext& ctx,
                             const Delta2Options& opts) {
  const EllipticSolver& es = *space.solver;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  // Unit directions fixed once so every candidate radius sees the same probes.
  std::vector<Eigen::VectorXd> dirs;
  for (int p = 0; p < std::max(0, opts.n_probes - 1); ++p) {
    Eigen::VectorXd u(space.N());
    for (auto& x : u) x = nd(rng);
    Eigen::VectorXd d = synthesize(space, u);
    const double n = es.l2_norm(d);
    if (n > 0.0) dirs.push_back(d / n);
  }
  if (v_direction.size() == omega0.size()) {
    const double n = es.l2_norm(v_direction);
    if (n > 0.0) dirs.push_back(v_direction / n);
  }

  Delta2Result res;
  auto worst_at = [&](double r) {
    ++res.candidates;
    double worst = 0.0;
    for (const auto& d : dirs) {
      try {
        const OperatorMatrix Ar = assemble_A(space, Eigen::VectorXd(omega0 + r * d), ctx);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ar.entries - A);
        worst = std::max(worst, svd.singularValues()(0));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TransversalityLost && e.kind() != ErrorKind::DegenerateExit) throw;
        return std::numeric_limits<double>::infinity();
      }
      if (worst > bound) break;
    }
    return worst;
  };

  if (cap <= 0.0) fail(ErrorKind::NoNeighborhood, "delta_c is not positive");
  double good = 0.0, bad = cap, gap = worst_at(cap);
  if (gap <= bound) {
    res.delta2 = cap;
    res.worst_gap = gap;
    return res;
  }
  double r = cap;
  for (int k = 0; k < opts.halvings; ++k) {
    r *= 0.5;
    const double g = worst_at(r);
    if (g <= bound) {
      good = r;
      gap = g;
      break;
    }
    bad = r;
  }
  if (good == 0.0) fail(ErrorKind::NoNeighborhood, "the Jacobian drifts beyond kappa0*eps0 at every sampled radius");
  for (int k = 0; k < opts.bisections; ++k) {
    const double mid = 0.5 * (good + bad);
    const double g = worst_at(mid);
    if (g <= bound) {
      good = mid;
      gap = g;
    } else {
      bad = mid;
    }
  }
  res.delta2 = good;
  res.worst_gap = gap;
  return res;
}

// ---------------------------------------------------------------------------

double block_bound(double kappa0, double epsilon0, double lambda1) {
  return std::sqrt(2.0) * kappa0 * std::sqrt(epsilon0 * epsilon0 + epsilon0 / lambda1);
}

double eta0_from(double lambda1, double epsilon0) { return std::min(1.0, lambda1 * epsilon0); }

CheckRecord check_A3(double kappa0, double epsilon0, double lambda1, double gamma) {
  CheckRecord c;
  c.name = "A3";
  c.inequality = "sqrt(2) kappa0 (eps0^2 + eps0/lambda1)^(1/2) <= 1/(2 gamma)";
  c.lhs = block_bound(kappa0, epsilon0, lambda1);
  c.rhs = 1.0 / (2.0 * gamma);
  c.pass = c.lhs <= c.rhs;
  return c;
}

double star_operator_norm(const Eigen::MatrixXd& B11, const Eigen::MatrixXd& B12,
                          const Eigen::MatrixXd& B21, const Eigen::MatrixXd& B22, double eta0) {
  const double s = std::sqrt(eta0);
  const Eigen::Index nu = B11.rows(), nv = B22.rows();
  Eigen::MatrixXd T(nu + nv, nu + nv);
  T.topLeftCorner(nu, nu) = B11;
  T.topRightCorner(nu, nv) = B12 / s;
  T.bottomLeftCorner(nv, nu) = s * B21;
  T.bottomRightCorner(nv, nv) = B22;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kBesselOrders = 4;  // k = 0..3
constexpr int kBesselRoots = 3;   // beta = j pi / R, j = 1..3

// psi = sum_{k,j} J_k(beta_j r) (a cos k th + b sin k th)
struct BesselField {
  std::array<double, kBesselOrders * kBesselRoots> a{}, b{};
};

// Mode values at one point, shared by every field.
struct BesselTable {
  double r = 0.0, th = 0.0;
  std::array<double, kBesselOrders * kBesselRoots> J{}, dJ{};
  std::array<double, kBesselOrders> c{}, s{};

  BesselTable(const Vec2& x, double R) : r(x.norm()), th(std::atan2(x.y(), x.x())) {
    for (int j = 0; j < kBesselRoots; ++j) {
      const double beta = (j + 1) * std::numbers::pi / R, z = beta * r;
      std::array<double, kBesselOrders + 1> Jk{};
      for (int k = 0; k <= kBesselOrders; ++k) Jk[k] = std::cyl_bessel_j(k, z);
      for (int k = 0; k < kBesselOrders; ++k) {
        J[k * kBesselRoots + j] = Jk[k];
        dJ[k * kBesselRoots + j] = beta * (k == 0 ? -Jk[1] : 0.5 * (Jk[k - 1] - Jk[k + 1]));
      }
    }
    for (int k = 0; k < kBesselOrders; ++k) {
      c[k] = std::cos(k * th);
      s[k] = std::sin(k * th);
    }
  }

  Vec2 perp_gradient(const BesselField& f) const {
    double pr = 0.0, pt = 0.0;
    for (int k = 0; k < kBesselOrders; ++k)
      for (int j = 0; j < kBesselRoots; ++j) {
        const int i = k * kBesselRoots + j;
        pr += dJ[i] * (f.a[i] * c[k] + f.b[i] * s[k]);
        pt += J[i] * k * (-f.a[i] * s[k] + f.b[i] * c[k]);
      }
    const double ct = std::cos(th), st = std::sin(th);
    const double inv = r > 0.0 ? 1.0 / r : 0.0;
    const Vec2 grad(pr * ct - pt * inv * st, pr * st + pt * inv * ct);
    return Vec2(-grad.y(), grad.x());
  }
};

}  // namespace

Lemma31Audit lemma31_audit(const VelocityField& q, const BoundaryProfile& h, double C_tilde, double M,
                           double T_star, int n_perturbations, std::uint64_t seed,
                           const TraceOptions& opts, unsigned threads) {
  Lemma31Audit out;
  out.perturbations = n_perturbations;
  out.bound_factor = C_tilde * K_of(M, T_star, q.mu());
  if (n_perturbations <= 0) return out;
  const Mesh& mesh = *q.mesh();
  const auto nv = static_cast<int>(mesh.num_vertices());
  const double R = mesh.domain().spec().r_outer;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<BesselField> fields(n_perturbations);
  for (auto& f : fields)
    for (int k = 0; k < kBesselOrders; ++k)
      for (int j = 0; j < kBesselRoots; ++j) {
        f.a[k * kBesselRoots + j] = nd(rng);
        f.b[k * kBesselRoots + j] = k == 0 ? 0.0 : nd(rng);
      }

  std::vector<double> lumped(nv, 0.0);
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t)
    for (int v : mesh.triangles()[t]) lumped[v] += mesh.area(t) / 3.0;

  // Vertices of D*: backward trace lands on Sigma_1 inside the support of h.
  std::vector<char> in_star(nv, 0);
  parallel_for(nv, threads, [&](std::size_t v) {
    try {
      const CharacteristicTrace tr = trace(q, mesh.vertices()[v], Direction::backward, opts);
      if (tr.outcome == TraceOutcome::hit_sigma1) {
        const double th = std::atan2(tr.exit_point.y(), tr.exit_point.x());
        in_star[v] = h.in_support(th) ? 1 : 0;
      }
    } catch (const Error&) {
    }
  });

  constexpr int kBatch = 10;
  for (int first = 0; first < n_perturbations; first += kBatch) {
    const int count = std::min(kBatch, n_perturbations - first);
    const PerturbationSet pert = PerturbationSet::from_function(
        count, [&fields, first, count, R](const Vec2& x, Eigen::Ref<Eigen::Matrix<double, 2, Eigen::Dynamic>> o) {
          const BesselTable tab(x, R);
          for (int j = 0; j < count; ++j) o.col(j) = tab.perp_gradient(fields[first + j]);
        });
    const Eigen::MatrixXd wt = tangent_field(q, pert, h, opts, 0.0, threads);
    for (int j = 0; j < count; ++j) {
      double num = 0.0, den = 0.0;
      for (int v = 0; v < nv; ++v) {
        num += lumped[v] * wt(v, j) * wt(v, j);
        if (in_star[v]) den += lumped[v] * BesselTable(mesh.vertices()[v], R).perp_gradient(fields[first + j]).squaredNorm();
      }
      const double bound = out.bound_factor * std::sqrt(den);
      const double ratio = num == 0.0 ? 0.0 : std::sqrt(num) / bound;
      out.ratios.push_back(ratio);
      out.max_ratio = std::max(out.max_ratio, ratio);
    }
  }
  return out;
}

}  // namespace vortcert
