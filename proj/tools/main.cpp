#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vortcert/certificate.hpp"
#include "vortcert/config.hpp"
#include "vortcert/error.hpp"
#include "vortcert/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vortcert;

namespace {

constexpr int kAccepted = 0;
constexpr int kFailedVerdict = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

// VORTCERT_OUTPUT_DIR wins over the config's output_dir.
fs::path output_dir(const RunConfig& c) {
  if (const char* env = std::getenv("VORTCERT_OUTPUT_DIR"); env && *env) return env;
  return c.output_dir;
}

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::ConfigError ? kConfigError : kNumericalFailure;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) fail(ErrorKind::IoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Existence certificates for self-similar Euler profiles on an annulus"};
  app.require_subcommand(1);

  std::string config_path, points_path, format = "text", certificate_path;
  bool ack = false;

  auto* certify_cmd = app.add_subcommand("certify", "run the full pipeline and emit a certificate");
  certify_cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
  certify_cmd->add_flag("--ack-sampled-bounds", ack, "accept sampled bounds and user-supplied constants");

  auto* solve_cmd = app.add_subcommand("solve", "compute Omega_0 and iterate, without the ledger");
  solve_cmd->add_option("--config", config_path, "run configuration (JSON)")->required();

  auto* trace_cmd = app.add_subcommand("trace", "trace characteristics through given points");
  trace_cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
  trace_cmd->add_option("--points", points_path, "CSV with x,y rows")->required();

  auto* report_cmd = app.add_subcommand("report", "render an existing certificate");
  report_cmd->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  report_cmd->add_option("--certificate", certificate_path, "certificate.json (default: <output dir>/certificate.json)");
  report_cmd->add_option("--config", config_path, "configuration naming the output dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kConfigError;
  }

  try {
    if (*report_cmd) {
      fs::path p = certificate_path;
      if (p.empty()) {
        fs::path dir = config_path.empty() ? fs::path("out") : fs::path(load_config(config_path).output_dir);
        if (const char* env = std::getenv("VORTCERT_OUTPUT_DIR"); env && *env) dir = env;
        p = dir / "certificate.json";
      }
      const Certificate c = parse_certificate_json(read_file(p));
      std::cout << (format == "json" ? certificate_json(c) : certificate_text(c));
      return kAccepted;
    }

    RunConfig cfg = load_config(config_path);
    const fs::path out = output_dir(cfg);

    if (*certify_cmd) {
      if (ack) cfg.acknowledgments = {true, true};
      const RunReport r = run_certify(cfg, out);
      const Certificate& c = *r.certificate;
      std::cout << "verdict: " << to_string(c.verdict) << '\n';
      for (const auto& f : c.failing()) std::cout << "failing check: " << f << '\n';
      if (c.conclusion_delta2) std::cout << "delta2: " << *c.conclusion_delta2 << '\n';
      if (!r.iteration_error.empty()) std::cout << "iteration: " << r.iteration_error << '\n';
      std::cout << "output: " << out.string() << '\n';
      if (c.verdict == Verdict::conditionally_certified && !c.accepted())
        std::cout << "conditional constants not acknowledged (use --ack-sampled-bounds)\n";
      return c.accepted() ? kAccepted : kFailedVerdict;
    }
    if (*solve_cmd) {
      const RunReport r = run_solve(cfg, out);
      std::cout << "steps: " << r.iteration->history.size()
                << " converged: " << (r.iteration->converged ? "yes" : "no")
                << " residual: " << r.iteration->final_lambda_residual << '\n';
      std::cout << "output: " << out.string() << '\n';
      return kAccepted;
    }
    if (*trace_cmd) {
      const auto pts = read_points_csv(points_path);
      const auto rows = run_trace(cfg, pts, out);
      std::printf("%-4s %-24s %-24s %-12s %-24s %-12s\n", "id", "x", "y", "backward", "tau", "forward");
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& p = rows[i];
        if (!p.ok) {
          std::printf("%-4zu %-24.17g %-24.17g error: %s\n", i, p.y.x(), p.y.y(), p.error.c_str());
          continue;
        }
        std::printf("%-4zu %-24.17g %-24.17g %-12s %-24.17g %-12s T=%.17g\n", i, p.y.x(), p.y.y(),
                    to_string(p.backward).c_str(), p.tau, to_string(p.forward).c_str(), p.T);
      }
      return kAccepted;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kAccepted;
}
