#include "vortcert/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vortcert/error.hpp"

namespace vortcert {

using json = nlohmann::ordered_json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(ErrorKind::ConfigError, where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(ErrorKind::ConfigError, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

std::vector<FourierMode> modes_from(const json& j) {
  std::vector<FourierMode> out;
  for (const auto& m : j) {
    only_keys(m, "mode", {"k", "cos", "sin"});
    out.push_back({m.at("k").get<int>(), get_or(m, "cos", 0.0), get_or(m, "sin", 0.0)});
  }
  return out;
}

json modes_to(const std::vector<FourierMode>& modes) {
  json a = json::array();
  for (const auto& m : modes) a.push_back({{"k", m.k}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
  return a;
}

FourierSeries series_from(const json& j) {
  only_keys(j, "series", {"mean", "modes"});
  return {get_or(j, "mean", 0.0), j.contains("modes") ? modes_from(j.at("modes")) : std::vector<FourierMode>{}};
}

json series_to(const FourierSeries& s) { return {{"mean", s.mean}, {"modes", modes_to(s.modes)}}; }

DomainKind domain_kind(const std::string& s) {
  if (s == "annulus") return DomainKind::annulus;
  if (s == "deformed-annulus") return DomainKind::deformed_annulus;
  if (s == "disc") return DomainKind::disc;
  fail(ErrorKind::ConfigError, "unknown domain kind '" + s + "'");
}

BasisKind basis_kind(const std::string& s) {
  if (s == "mixed-eigen") return BasisKind::mixed_eigen;
  if (s == "dirichlet-eigen") return BasisKind::dirichlet_eigen;
  fail(ErrorKind::ConfigError, "unknown basis kind '" + s + "'");
}

ProbeScheme probe_scheme(const std::string& s) {
  if (s == "tangent") return ProbeScheme::tangent;
  if (s == "finite-difference") return ProbeScheme::finite_difference;
  fail(ErrorKind::ConfigError, "unknown probe scheme '" + s + "'");
}

RunConfig from_json(const json& j) {
  only_keys(j, "config",
            {"domain", "mu", "g", "h", "basis", "ode_tol", "fd_step", "probe", "T_max", "C2", "seed",
             "acknowledgments", "output_dir", "max_iter", "stop_tol", "galerkin_steps", "transversality_samples",
             "delta2_probes", "threads"});
  RunConfig c;
  const json& d = j.at("domain");
  only_keys(d, "domain", {"kind", "r_outer", "r_inner", "outer_perturbation", "inner_perturbation", "sigma1",
                          "mesh_target_h"});
  c.domain.kind = domain_kind(get_or<std::string>(d, "kind", "annulus"));
  c.domain.r_outer = get_or(d, "r_outer", c.domain.r_outer);
  c.domain.r_inner = get_or(d, "r_inner", c.domain.r_inner);
  if (d.contains("outer_perturbation")) c.domain.outer_perturbation = modes_from(d.at("outer_perturbation"));
  if (d.contains("inner_perturbation")) c.domain.inner_perturbation = modes_from(d.at("inner_perturbation"));
  const std::string s1 = get_or<std::string>(d, "sigma1", "outer");
  if (s1 != "outer" && s1 != "inner") fail(ErrorKind::ConfigError, "sigma1 must be 'outer' or 'inner'");
  c.domain.sigma1 = s1 == "outer" ? CurveId::outer : CurveId::inner;
  c.domain.mesh_target_h = get_or(d, "mesh_target_h", c.domain.mesh_target_h);

  c.mu = j.at("mu").get<double>();
  if (j.contains("g")) {
    only_keys(j.at("g"), "g", {"sigma1", "sigma2"});
    if (j.at("g").contains("sigma1")) c.g.sigma1 = series_from(j.at("g").at("sigma1"));
    if (j.at("g").contains("sigma2")) c.g.sigma2 = series_from(j.at("g").at("sigma2"));
  }
  if (j.contains("h")) {
    const json& h = j.at("h");
    only_keys(h, "h", {"mean", "modes", "arc", "scale"});
    c.h.series = {get_or(h, "mean", 0.0), h.contains("modes") ? modes_from(h.at("modes")) : std::vector<FourierMode>{}};
    c.h.scale = get_or(h, "scale", 1.0);
    if (h.contains("arc") && !h.at("arc").is_null()) {
      const json& a = h.at("arc");
      only_keys(a, "arc", {"theta_a", "theta_b", "ramp_width"});
      c.h.arc = SupportArc{a.at("theta_a").get<double>(), a.at("theta_b").get<double>(),
                           a.at("ramp_width").get<double>()};
    }
  }
  if (j.contains("basis")) {
    const json& b = j.at("basis");
    only_keys(b, "basis", {"kind", "N", "boundary_function"});
    c.basis = basis_kind(get_or<std::string>(b, "kind", "mixed-eigen"));
    c.N = get_or(b, "N", c.N);
    c.boundary_function = get_or(b, "boundary_function", c.boundary_function);
  }
  c.ode_tol = get_or(j, "ode_tol", c.ode_tol);
  c.fd_step = get_or(j, "fd_step", c.fd_step);
  c.probe = probe_scheme(get_or<std::string>(j, "probe", "tangent"));
  c.T_max = get_or(j, "T_max", c.T_max);
  if (j.contains("C2") && !j.at("C2").is_null()) c.C2_override = j.at("C2").get<double>();
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("acknowledgments")) {
    const json& a = j.at("acknowledgments");
    only_keys(a, "acknowledgments", {"sampled_bounds", "user_constants"});
    c.acknowledgments.sampled_bounds = get_or(a, "sampled_bounds", false);
    c.acknowledgments.user_constants = get_or(a, "user_constants", false);
  }
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
  c.max_iter = get_or(j, "max_iter", c.max_iter);
  c.stop_tol = get_or(j, "stop_tol", c.stop_tol);
  c.galerkin_steps = get_or(j, "galerkin_steps", c.galerkin_steps);
  c.transversality_samples = get_or(j, "transversality_samples", c.transversality_samples);
  c.delta2_probes = get_or(j, "delta2_probes", c.delta2_probes);
  c.threads = get_or(j, "threads", c.threads);
  return c;
}

std::string domain_kind_name(DomainKind k) { return to_string(k); }

}  // namespace

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorKind::ConfigError, msg);
  };
  need(c.mu > 0.5, "mu must satisfy mu > 1/2 (got " + std::to_string(c.mu) + ")");
  need(c.N >= 1, "basis N must be >= 1");
  need(c.ode_tol > 0.0 && c.fd_step > 0.0 && c.T_max > 0.0 && c.stop_tol > 0.0, "all tolerances must be > 0");
  need(c.domain.mesh_target_h > 0.0, "mesh_target_h must be > 0");
  need(c.domain.r_outer > 0.0, "r_outer must be > 0");
  need(c.C2() > 0.0, "C2 must be > 0");
  need(c.max_iter >= 0 && c.galerkin_steps >= 0, "iteration counts must be >= 0");
  need(c.transversality_samples >= 2 && c.delta2_probes >= 1, "sample counts too small");
  if (c.h.arc) {
    const SupportArc& a = *c.h.arc;
    need(a.theta_a < a.theta_b, "support arc needs theta_a < theta_b");
    need(a.length() < 2.0 * std::numbers::pi, "support arc must be strictly inside the boundary parameter range");
    need(a.ramp_width > 0.0 && 2.0 * a.ramp_width <= a.length(), "ramp_width must be in (0, arc length / 2]");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  try {
    c = from_json(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::ConfigError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_json(const RunConfig& c) {
  json j;
  j["domain"] = {{"kind", domain_kind_name(c.domain.kind)},
                 {"r_outer", c.domain.r_outer},
                 {"r_inner", c.domain.r_inner},
                 {"outer_perturbation", modes_to(c.domain.outer_perturbation)},
                 {"inner_perturbation", modes_to(c.domain.inner_perturbation)},
                 {"sigma1", c.domain.sigma1 == CurveId::outer ? "outer" : "inner"},
                 {"mesh_target_h", c.domain.mesh_target_h}};
  j["mu"] = c.mu;
  j["g"] = {{"sigma1", series_to(c.g.sigma1)}, {"sigma2", series_to(c.g.sigma2)}};
  json h = {{"mean", c.h.series.mean}, {"modes", modes_to(c.h.series.modes)}, {"scale", c.h.scale}};
  if (c.h.arc)
    h["arc"] = {{"theta_a", c.h.arc->theta_a}, {"theta_b", c.h.arc->theta_b}, {"ramp_width", c.h.arc->ramp_width}};
  else
    h["arc"] = nullptr;
  j["h"] = h;
  j["basis"] = {{"kind", to_string(c.basis)}, {"N", c.N}, {"boundary_function", c.boundary_function}};
  j["ode_tol"] = c.ode_tol;
  j["fd_step"] = c.fd_step;
  j["probe"] = to_string(c.probe);
  j["T_max"] = c.T_max;
  j["C2"] = c.C2_override ? json(*c.C2_override) : json(nullptr);
  j["seed"] = c.seed;
  j["acknowledgments"] = {{"sampled_bounds", c.acknowledgments.sampled_bounds},
                          {"user_constants", c.acknowledgments.user_constants}};
  j["output_dir"] = c.output_dir;
  j["max_iter"] = c.max_iter;
  j["stop_tol"] = c.stop_tol;
  j["galerkin_steps"] = c.galerkin_steps;
  j["transversality_samples"] = c.transversality_samples;
  j["delta2_probes"] = c.delta2_probes;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& c) {
  const std::string s = config_json(c);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t x = seed;
  for (unsigned char ch : stream) x = (x ^ ch) * 0x100000001b3ull;
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace vortcert
