#include "vortcert/certificate.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "vortcert/error.hpp"

namespace vortcert {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::conditionally_certified: return "conditionally-certified";
    case Verdict::failed: return "failed";
  }
  return "unknown";
}

std::vector<std::string> Certificate::failing() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(c.name);
  return out;
}

bool Certificate::accepted() const {
  if (verdict == Verdict::certified) return true;
  if (verdict == Verdict::failed) return false;
  bool sampled = false, user = false;
  for (const auto& e : ledger.entries()) {
    sampled = sampled || e.provenance == Provenance::sampled_bound;
    user = user || e.provenance == Provenance::user_supplied;
  }
  return (!sampled || acks.sampled_bounds) && (!user || acks.user_constants);
}

const std::vector<std::string>& required_constants() {
  static const std::vector<std::string> names{"C_tilde", "K",     "C2",      "lambda1", "epsilon0",
                                              "kappa0",  "delta1", "delta_c", "gamma",   "delta2"};
  return names;
}

namespace {

CheckRecord make_check(std::string name, std::string inequality, double lhs, double rhs, bool pass) {
  return {std::move(name), std::move(inequality), lhs, rhs, pass};
}

}  // namespace

Certificate certify(const CertifyInputs& in) {
  Certificate c;
  c.acks = in.acks;
  c.seed = in.seed;
  c.config_hash = in.config_hash;
  c.delta0 = in.delta0;
  c.upsilon_residual = in.upsilon_residual;
  ConstantsLedger& L = c.ledger;
  auto add = [&](CheckRecord r) {
    c.checks.push_back(std::move(r));
    return c.checks.back().pass;
  };
  auto stop = [&]() {
    c.verdict = Verdict::failed;
    return c;
  };

  const TransversalityReport& tr = in.transversality;
  L.set("mu", in.mu, Provenance::analytic_formula, {"config"});
  L.set("M", in.bounds.M, Provenance::sampled_bound, {"sup|q|", "sup|Dq|", "safety"});
  L.set("h_C0", in.h_norms.h_c0, Provenance::sampled_bound, {"h"});
  L.set("Dh_C0", in.h_norms.dh_c0, Provenance::sampled_bound, {"dh/dtheta"});
  L.set("c1", tr.c1, Provenance::sampled_bound, {"forward traces from Sigma_1*"});
  L.set("T_star", tr.T_star, Provenance::sampled_bound, {"forward traces from Sigma_1*"});
  if (!add(make_check("transversality", "c1 > 0, all traces exit through Sigma_2, T* < T_max", tr.c1, 0.0,
                      tr.pass())))
    return stop();
  if (!add(make_check("relevant_timeouts", "timeout vertices near nonzero Omega_0 == 0", in.relevant_timeouts,
                      0.0, in.relevant_timeouts == 0)))
    return stop();

  double C_tilde = 0.0;
  try {
    C_tilde = compute_C_tilde(in.bounds, in.h_norms);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonTransversal) throw;
    add(make_check("C_tilde", "inf |<n,q>| on Sigma_1* > 0", in.bounds.inf_nq_sigma1, 0.0, false));
    return stop();
  }
  L.set("C_tilde", C_tilde, Provenance::sampled_bound, {"h_C0", "Dh_C0", "inf|<n,q>|", "sup|q|"});
  L.set("K(M,T*)", K_of(in.bounds.M, tr.T_star, in.mu), Provenance::analytic_formula, {"M", "T_star", "mu"});
  L.set("lambda1", in.lambda1, Provenance::discrete_estimate, {"P1 eigenpairs"});
  L.set("epsilon0", in.epsilon0.epsilon0, Provenance::discrete_estimate,
        {"power iteration", "safety " + std::to_string(in.epsilon0.safety_factor)});

  if (!in.gamma) {
    add(make_check("A2", "sigma_min(I - A) >= 1e-10", 0.0, 1e-10, false));
    return stop();
  }
  L.set("sigma_min", in.gamma->sigma_min, Provenance::discrete_estimate, {"A"});
  L.set("gamma", in.gamma->gamma, Provenance::discrete_estimate, {"sigma_min", "discrete-level constant"});
  add(make_check("A2", "sigma_min(I - A) >= 1e-10", in.gamma->sigma_min, 1e-10, true));

  Delta1Result d1;
  try {
    d1 = delta1_margin({tr.c1, tr.T_star, in.bounds.M, in.normal_lipschitz, in.corridor});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoMargin) throw;
    add(make_check("P1", "delta1 >= 2^-20", 0.0, std::ldexp(1.0, -20), false));
    return stop();
  }
  L.set("Lip<n,q>|Sigma_2", in.normal_lipschitz, Provenance::sampled_bound, {"q"});
  L.set("corridor", in.corridor, Provenance::sampled_bound, {"exit points"});
  L.set("delta1", d1.delta1, Provenance::sampled_bound, {"c1", "T_star", "M", "Lip<n,q>|Sigma_2", "corridor"});
  add(make_check("P1", "delta1 >= 2^-20", d1.delta1, std::ldexp(1.0, -20), true));

  const Kappa0 k0 = kappa0(C_tilde, in.bounds.M, d1.delta1, tr.T_star, in.mu, in.lambda1);
  L.set("K", K_of(in.bounds.M + d1.delta1, tr.T_star + 1.0, in.mu), Provenance::analytic_formula,
        {"M", "delta1", "T_star", "mu"});
  L.set("kappa0", k0.kappa0, Provenance::analytic_formula, {"C_tilde", "K"});
  L.set("kappa0/lambda1", k0.over_lambda1, Provenance::analytic_formula, {"kappa0", "lambda1"});

  C1Inputs ci{tr.T_star, in.bounds.M, C_tilde, in.h_norms.h_c0, in.gamma->gamma, in.A_norm, in.B_U};
  L.set("A_norm", in.A_norm, Provenance::discrete_estimate, {"A"});
  L.set("B_U", in.B_U, Provenance::sampled_bound, {"basis"});
  const double C1 = C1_bound(ci);
  L.set("C1", C1, Provenance::discrete_estimate, {"T_star", "M", "C_tilde", "h_C0", "gamma", "A_norm", "B_U"});
  L.set("C2", in.C2, Provenance::user_supplied, {"config"});
  const double alpha = 0.5;
  L.set("alpha", alpha, Provenance::analytic_formula, {});
  L.set("rho", in.rho, Provenance::sampled_bound, {"mesh vertices"});
  const double delta = holder_window(C1, in.C2, d1.delta1);
  L.set("delta", delta, Provenance::analytic_formula, {"C1", "C2", "delta1"});
  if (!add(make_check("holder_window", "rho > 0 and 0 < delta < 1", delta, 1.0,
                      in.rho > 0.0 && delta > 0.0 && delta < 1.0)))
    return stop();

  const double dc = std::min(delta_c(in.rho, alpha, delta, d1.delta1 / in.C2), d1.delta1);
  L.set("delta_c", dc, Provenance::analytic_formula, {"rho", "alpha", "delta", "delta1", "C2"});
  if (!add(make_check("delta_c", "delta_c > 0", dc, 0.0, dc > 0.0))) return stop();
  const double chain = 2.0 * C1 * std::sqrt(delta);
  if (!add(make_check("holder_chain", "2 C1 delta^(1/2) <= delta1 / C2", chain, d1.delta1 / in.C2,
                      chain <= d1.delta1 / in.C2 * (1.0 + 1e-12))))
    return stop();

  const double eps0 = in.epsilon0.epsilon0;
  const double eta0 = eta0_from(in.lambda1, eps0);
  L.set("eta0", eta0, Provenance::analytic_formula, {"lambda1", "epsilon0"});
  if (!add(check_A3(k0.kappa0, eps0, in.lambda1, in.gamma->gamma))) return stop();

  double d2 = 0.0;
  if (in.h_zero) {
    d2 = dc;
    L.set("delta2", d2, Provenance::analytic_formula, {"delta_c", "Lambda identically zero"});
  } else {
    try {
      if (!in.delta2) fail(ErrorKind::NoNeighborhood, "no delta2 estimator supplied");
      const Delta2Result r = in.delta2(k0.kappa0 * eps0, dc);
      d2 = r.delta2;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoNeighborhood) throw;
      add(make_check("delta2", "delta2 > 0", 0.0, 0.0, false));
      return stop();
    }
    L.set("delta2", d2, Provenance::sampled_bound, {"kappa0", "epsilon0", "delta_c", "probes"});
  }
  if (!add(make_check("delta2", "delta2 > 0", d2, 0.0, d2 > 0.0))) return stop();

  const double rhs = 0.5 * d2 * std::sqrt(eta0);
  if (!add(make_check("theorem_hypothesis", "||Upsilon(Omega0) - Omega0|| <= delta2 sqrt(eta0) / 2",
                      in.upsilon_residual, rhs, in.upsilon_residual <= rhs)))
    return stop();

  const auto missing = L.missing(required_constants());
  if (!missing.empty()) {
    std::string m;
    for (const auto& n : missing) m += (m.empty() ? "" : ", ") + n;
    fail(ErrorKind::LedgerIncomplete, "ledger lacks: " + m);
  }

  c.conclusion_delta2 = d2;
  bool conditional = false;
  for (const auto& e : L.entries())
    conditional = conditional || e.provenance == Provenance::sampled_bound ||
                  e.provenance == Provenance::user_supplied;
  if (in.h_zero && in.upsilon_residual == 0.0) {
    c.verdict = Verdict::certified;
    c.notes.push_back("Omega = 0 solves the problem exactly; no estimated constant affects the conclusion");
  } else {
    c.verdict = conditional ? Verdict::conditionally_certified : Verdict::certified;
  }
  c.notes.push_back("gamma, A and epsilon0 are discrete-level constants");
  return c;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

std::string certificate_json(const Certificate& c) {
  using json = nlohmann::ordered_json;
  json j;
  json constants = json::array();
  for (const auto& e : c.ledger.entries())
    constants.push_back({{"name", e.name},
                         {"value", num(e.value)},
                         {"provenance", to_string(e.provenance)},
                         {"inputs", e.inputs}});
  j["constants"] = constants;
  json checks = json::array();
  for (const auto& k : c.checks)
    checks.push_back(
        {{"name", k.name}, {"inequality", k.inequality}, {"lhs", num(k.lhs)}, {"rhs", num(k.rhs)}, {"pass", k.pass}});
  j["checks"] = checks;
  j["residuals"] = {{"delta0", num(c.delta0)}, {"upsilon_residual", num(c.upsilon_residual)}};
  j["verdict"] = to_string(c.verdict);
  if (c.conclusion_delta2)
    j["conclusion"] = {{"statement", "||Omega_bar - Omega0||_L2 <= delta2"}, {"delta2", num(*c.conclusion_delta2)}};
  else
    j["conclusion"] = nullptr;
  j["acknowledgments"] = {{"sampled_bounds", c.acks.sampled_bounds}, {"user_constants", c.acks.user_constants}};
  j["notes"] = c.notes;
  j["seed"] = c.seed;
  j["config_hash"] = c.config_hash;
  return j.dump(2) + "\n";
}

Certificate parse_certificate_json(const std::string& text) {
  using json = nlohmann::ordered_json;
  auto val = [](const json& x) {
    return x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>();
  };
  auto prov = [](const std::string& s) {
    for (Provenance p : {Provenance::analytic_formula, Provenance::sampled_bound, Provenance::discrete_estimate,
                         Provenance::user_supplied})
      if (to_string(p) == s) return p;
    fail(ErrorKind::IoError, "unknown provenance '" + s + "'");
  };
  Certificate c;
  try {
    const json j = json::parse(text);
    for (const auto& e : j.at("constants"))
      c.ledger.set(e.at("name").get<std::string>(), val(e.at("value")), prov(e.at("provenance").get<std::string>()),
                   e.at("inputs").get<std::vector<std::string>>());
    for (const auto& k : j.at("checks"))
      c.checks.push_back({k.at("name").get<std::string>(), k.at("inequality").get<std::string>(), val(k.at("lhs")),
                          val(k.at("rhs")), k.at("pass").get<bool>()});
    c.delta0 = val(j.at("residuals").at("delta0"));
    c.upsilon_residual = val(j.at("residuals").at("upsilon_residual"));
    const std::string v = j.at("verdict").get<std::string>();
    bool known = false;
    for (Verdict x : {Verdict::certified, Verdict::conditionally_certified, Verdict::failed})
      if (to_string(x) == v) {
        c.verdict = x;
        known = true;
      }
    if (!known) fail(ErrorKind::IoError, "unknown verdict '" + v + "'");
    if (!j.at("conclusion").is_null()) c.conclusion_delta2 = val(j.at("conclusion").at("delta2"));
    c.acks.sampled_bounds = j.at("acknowledgments").at("sampled_bounds").get<bool>();
    c.acks.user_constants = j.at("acknowledgments").at("user_constants").get<bool>();
    c.notes = j.at("notes").get<std::vector<std::string>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.config_hash = j.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::IoError, std::string("certificate: ") + e.what());
  }
  return c;
}

std::string certificate_text(const Certificate& c) {
  std::ostringstream os;
  os << "constants:\n";
  for (const auto& e : c.ledger.entries()) {
    os << "  " << std::left << std::setw(18) << e.name << ' ' << std::setw(24) << fmt(e.value) << ' '
       << to_string(e.provenance);
    if (!e.inputs.empty()) {
      os << "  [";
      for (std::size_t i = 0; i < e.inputs.size(); ++i) os << (i ? ", " : "") << e.inputs[i];
      os << ']';
    }
    os << '\n';
  }
  os << "checks:\n";
  for (const auto& k : c.checks)
    os << "  " << (k.pass ? "PASS " : "FAIL ") << std::setw(20) << k.name << " lhs=" << fmt(k.lhs)
       << " rhs=" << fmt(k.rhs) << "  " << k.inequality << '\n';
  os << "residuals:\n  delta0 " << fmt(c.delta0) << "\n  upsilon_residual " << fmt(c.upsilon_residual) << '\n';
  os << "verdict: " << to_string(c.verdict) << '\n';
  if (c.conclusion_delta2)
    os << "conclusion: ||Omega_bar - Omega0||_L2 <= delta2 = " << fmt(*c.conclusion_delta2) << '\n';
  else
    os << "conclusion: none\n";
  os << "acknowledgments: sampled_bounds=" << (c.acks.sampled_bounds ? "true" : "false")
     << " user_constants=" << (c.acks.user_constants ? "true" : "false") << '\n';
  os << "notes:\n";
  for (const auto& n : c.notes) os << "  " << n << '\n';
  os << "seed: " << c.seed << '\n';
  os << "config_hash: " << c.config_hash << '\n';
  return os.str();
}

}  // namespace vortcert
