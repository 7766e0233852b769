#include "vortcert/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>
#include <json.hpp>

#include "vortcert/constants.hpp"
#include "vortcert/error.hpp"
#include "vortcert/mesh_io.hpp"

namespace vortcert {

namespace {

class Stopwatch {
 public:
  Stopwatch(std::vector<StageTiming>* out, std::string stage)
      : out_(out), stage_(std::move(stage)), t0_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    if (!out_) return;
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - t0_;
    out_->push_back({stage_, d.count()});
  }

 private:
  std::vector<StageTiming>* out_;
  std::string stage_;
  std::chrono::steady_clock::time_point t0_;
};

void write_text(const std::filesystem::path& p, const std::string& s) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot write " + p.string());
  os << s;
}

// Timeout vertices whose one-ring carries a non-negligible Omega_0.
int relevant_timeouts(const Mesh& mesh, const TransportResult& tr, const Eigen::VectorXd& omega0) {
  if (tr.timeouts == 0) return 0;
  std::vector<char> hot(mesh.num_vertices(), 0);
  for (const auto& t : mesh.triangles()) {
    bool any = false;
    for (int v : t) any = any || std::abs(omega0[v]) > 1e-8;
    if (any)
      for (int v : t) hot[v] = 1;
  }
  int n = 0;
  for (std::size_t v = 0; v < tr.outcomes.size(); ++v)
    if (tr.outcomes[v] == TraceOutcome::timeout && hot[v]) ++n;
  return n;
}

double spectral_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

std::string report_json(const RunReport& r, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = r.config_hash;
  if (r.certificate) j["verdict"] = to_string(r.certificate->verdict);
  if (r.iteration) {
    double worst = 0.0;
    for (double x : r.iteration->ratios) worst = std::max(worst, x);
    j["iteration"] = {{"steps", r.iteration->history.size()},
                      {"converged", r.iteration->converged},
                      {"final_lambda_residual", r.iteration->final_lambda_residual},
                      {"max_ratio", worst}};
  }
  if (!r.iteration_error.empty()) j["iteration_error"] = r.iteration_error;
  j["manifest"] = r.manifest;
  nlohmann::ordered_json t = nlohmann::ordered_json::array();
  for (const auto& s : r.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  j["timings"] = t;
  return j.dump(2) + "\n";
}

LambdaContext make_context(const RunConfig& c, std::shared_ptr<const EllipticSolver> solver,
                           const ScalarField& psi_g) {
  LambdaContext ctx;
  ctx.solver = std::move(solver);
  ctx.psi_g = psi_g;
  ctx.mu = c.mu;
  ctx.h = c.h;
  ctx.trace.T_max = c.T_max;
  ctx.trace.tol = c.ode_tol;
  ctx.transversality_samples = c.transversality_samples;
  ctx.threads = c.threads;
  return ctx;
}

void write_fields(const Setup& s, const std::filesystem::path& out, const Eigen::VectorXd& omega_bar,
                  RunReport& r) {
  const EllipticSolver& es = *s.solver;
  write_mesh_csv(*s.mesh, out / "mesh");
  r.manifest.push_back("mesh/vertices.csv");
  r.manifest.push_back("mesh/triangles.csv");
  const Eigen::VectorXd phi_bar = es.poisson(omega_bar) + s.psi_g.values;
  write_field_csv(out / "fields" / "omega0.csv", s.omega0, "omega0");
  write_field_csv(out / "fields" / "omega_bar.csv", omega_bar, "omega_bar");
  write_field_csv(out / "fields" / "phi_bar.csv", phi_bar, "phi_bar");
  write_field_csv(out / "fields" / "psi_g.csv", s.psi_g.values, "psi_g");
  for (const char* f : {"fields/omega0.csv", "fields/omega_bar.csv", "fields/phi_bar.csv", "fields/psi_g.csv"})
    r.manifest.push_back(f);
  write_vtk(*s.mesh, out / "fields.vtk",
            {{"omega0", s.omega0}, {"omega_bar", omega_bar}, {"phi_bar", phi_bar}, {"psi_g", s.psi_g.values}});
  r.manifest.push_back("fields.vtk");
}

}  // namespace

Eigen::VectorXd galerkin_initial_guess(const GalerkinSpace& space, const LambdaContext& ctx, int max_steps,
                                       int* steps) {
  const auto n = static_cast<Eigen::Index>(space.solver->mesh()->num_vertices());
  if (steps) *steps = 0;
  if (ctx.h.support_empty()) return Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = coefficients(space, apply_Lambda(Eigen::VectorXd::Zero(n), ctx));
  for (int k = 0; k < max_steps; ++k) {
    const Eigen::VectorXd next = coefficients(space, apply_Lambda(synthesize(space, u), ctx));
    const double change = (next - u).norm();
    u = next;
    if (steps) *steps = k + 1;
    if (change <= 1e-13 * u.norm()) break;
  }
  return synthesize(space, u);
}

Setup prepare(const RunConfig& config, std::vector<StageTiming>* timings, bool with_omega0) {
  Setup s;
  s.config = config;
  {
    Stopwatch w(timings, "mesh");
    s.mesh = build_mesh(config.domain);
  }
  {
    Stopwatch w(timings, "elliptic");
    s.solver = std::make_shared<const EllipticSolver>(s.mesh);
    s.psi_g = s.solver->solve_harmonic_extension(config.g);
  }
  s.ctx = make_context(config, s.solver, s.psi_g);
  {
    Stopwatch w(timings, "space");
    SpaceOptions so;
    so.n_eigen = config.N;
    so.boundary_function = config.boundary_function;
    so.eigen.seed = derive_seed(config.seed, "eigen");
    s.space = build_space(s.solver, config.basis, config.h, so);
  }
  s.omega0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.mesh->num_vertices()));
  if (with_omega0) {
    Stopwatch w(timings, "omega0");
    s.omega0 = galerkin_initial_guess(s.space, s.ctx, config.galerkin_steps, &s.galerkin_steps);
  }
  return s;
}

RunReport run_certify(const RunConfig& config, const std::filesystem::path& out) {
  RunReport r;
  r.config_echo = config_json(config);
  r.config_hash = config_hash(config);
  std::filesystem::create_directories(out);
  Setup s = prepare(config, &r.timings, false);
  const LambdaContext& ctx = s.ctx;
  const auto nv = static_cast<Eigen::Index>(s.mesh->num_vertices());

  CertifyInputs in;
  in.mu = config.mu;
  in.h_zero = config.h.support_empty();
  in.C2 = config.C2();
  in.acks = config.acknowledgments;
  in.seed = config.seed;
  in.config_hash = r.config_hash;

  auto finish = [&](const Certificate& cert) {
    r.certificate = cert;
    write_text(out / "certificate.json", certificate_json(cert));
    write_text(out / "certificate.txt", certificate_text(cert));
    write_text(out / "config_echo.json", r.config_echo);
    r.manifest.insert(r.manifest.begin(), {"certificate.json", "certificate.txt", "config_echo.json"});
    r.manifest.push_back("report.json");
    write_text(out / "report.json", report_json(r, "certify"));
    return r;
  };

  // (A1) for the base field first: Omega_0 cannot be built without it.
  {
    Stopwatch w(&r.timings, "transversality");
    const VelocityField q_base = velocity_for(Eigen::VectorXd::Zero(nv), ctx);
    in.transversality = check_transversality(q_base, config.h, config.transversality_samples, ctx.trace,
                                             config.threads);
  }
  if (!in.transversality.pass()) return finish(certify(in));

  {
    Stopwatch w(&r.timings, "omega0");
    s.omega0 = galerkin_initial_guess(s.space, ctx, config.galerkin_steps, &s.galerkin_steps);
  }
  const VelocityField q0 = velocity_for(s.omega0, ctx);
  {
    Stopwatch w(&r.timings, "bounds");
    in.transversality = check_transversality(q0, config.h, config.transversality_samples, ctx.trace,
                                             config.threads);
    in.bounds = sup_bounds(q0, config.h);
    in.h_norms = boundary_norms(config.h);
    in.normal_lipschitz = normal_velocity_lipschitz(q0, BoundaryLabel::sigma2);
    in.corridor = corridor_half_width(s.mesh->domain(), in.transversality);
    in.rho = inner_radius(*s.mesh).rho;
    const TransportResult tr = solve_transport(q0, config.h, ctx.trace, config.threads);
    in.relevant_timeouts = relevant_timeouts(*s.mesh, tr, s.omega0);
    in.B_U = basis_c1_bound(s.space);
  }
  {
    Stopwatch w(&r.timings, "spectral");
    EigenOptions eo;
    eo.seed = derive_seed(config.seed, "lambda1");
    in.lambda1 = eigenpairs(*s.solver, BcKind::dirichlet_all, 1, eo).eigenvalues.front();
    Epsilon0Options e0;
    e0.seed = derive_seed(config.seed, "epsilon0");
    in.epsilon0 = estimate_epsilon0(*s.solver, s.space.basis, e0);
  }
  OperatorMatrix A;
  {
    Stopwatch w(&r.timings, "jacobian");
    A = assemble_A(s.space, s.omega0, ctx, config.probe, config.fd_step);
    try {
      in.gamma = gamma_bound(A.entries);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularJacobian) throw;
    }
    in.A_norm = spectral_norm(A.entries);
    write_matrix_csv(A.entries, out / "A.csv");
    r.manifest.push_back("A.csv");
  }
  const UpsilonMap ups(s.space, A.entries, ctx);
  {
    Stopwatch w(&r.timings, "residuals");
    Eigen::VectorXd lam;
    const Eigen::VectorXd up = ups(s.omega0, &lam);
    in.upsilon_residual = s.solver->l2_norm(up - s.omega0);
    in.delta0 = s.solver->l2_norm(s.omega0 - synthesize(s.space, coefficients(s.space, lam)));
  }
  Delta2Options d2o;
  d2o.n_probes = config.delta2_probes;
  d2o.seed = derive_seed(config.seed, "delta2");
  in.delta2 = [&](double bound, double cap) {
    Stopwatch w(&r.timings, "delta2");
    return delta2_estimate(s.space, s.omega0, A.entries, bound, cap, in.epsilon0.direction, ctx, d2o);
  };
  Certificate cert;
  {
    Stopwatch w(&r.timings, "certify");
    cert = certify(in);
  }

  {
    Stopwatch w(&r.timings, "iterate");
    IterationOptions io;
    io.max_iter = config.max_iter;
    io.stop_tol = config.stop_tol;
    if (cert.ledger.has("eta0")) io.eta0 = cert.ledger.value("eta0");
    if (cert.conclusion_delta2 && cert.verdict != Verdict::failed) io.enforce_radius = *cert.conclusion_delta2;
    try {
      r.iteration = iterate(s.omega0, ups, io);
    } catch (const Error& e) {
      r.iteration_error = e.what();
    }
  }
  if (r.iteration) {
    write_history_csv(r.iteration->history, out / "history.csv");
    r.manifest.push_back("history.csv");
  }
  write_fields(s, out, r.iteration ? r.iteration->omega_bar : s.omega0, r);
  return finish(cert);
}

RunReport run_solve(const RunConfig& config, const std::filesystem::path& out) {
  RunReport r;
  r.config_echo = config_json(config);
  r.config_hash = config_hash(config);
  std::filesystem::create_directories(out);
  Setup s = prepare(config, &r.timings, true);
  OperatorMatrix A;
  {
    Stopwatch w(&r.timings, "jacobian");
    A = assemble_A(s.space, s.omega0, s.ctx, config.probe, config.fd_step);
  }
  {
    Stopwatch w(&r.timings, "iterate");
    const UpsilonMap ups(s.space, A.entries, s.ctx);
    IterationOptions io;
    io.max_iter = config.max_iter;
    io.stop_tol = config.stop_tol;
    r.iteration = iterate(s.omega0, ups, io);
  }
  write_history_csv(r.iteration->history, out / "history.csv");
  r.manifest.push_back("history.csv");
  write_fields(s, out, r.iteration->omega_bar, r);
  write_text(out / "config_echo.json", r.config_echo);
  r.manifest.push_back("config_echo.json");
  r.manifest.push_back("report.json");
  write_text(out / "report.json", report_json(r, "solve"));
  return r;
}

std::vector<TracePoint> run_trace(const RunConfig& config, const std::vector<Vec2>& points,
                                  const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const Setup s = prepare(config, nullptr, true);
  const VelocityField q = velocity_for(s.omega0, s.ctx);
  TraceOptions o = s.ctx.trace;
  o.keep_samples = true;
  std::vector<TracePoint> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    TracePoint p;
    p.y = points[i];
    try {
      const CharacteristicTrace b = trace(q, p.y, Direction::backward, o);
      const CharacteristicTrace f = trace(q, p.y, Direction::forward, o);
      p.backward = b.outcome;
      p.tau = b.exit_time;
      p.forward = f.outcome;
      p.T = f.exit_time;
      write_trace_csv(b, out / ("trace_" + std::to_string(i) + "_backward.csv"));
      write_trace_csv(f, out / ("trace_" + std::to_string(i) + "_forward.csv"));
      p.ok = true;
    } catch (const Error& e) {
      p.error = e.what();
    }
    rows.push_back(std::move(p));
  }
  return rows;
}

std::vector<Vec2> read_points_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IoError, "cannot read " + path.string());
  std::vector<Vec2> pts;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    if (!(ls >> x >> y)) {
      if (first) {
        first = false;
        continue;
      }
      fail(ErrorKind::IoError, "bad point row: " + line);
    }
    first = false;
    pts.emplace_back(x, y);
  }
  return pts;
}

}  // namespace vortcert
