#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "vortcert/boundary_data.hpp"
#include "vortcert/certificate.hpp"
#include "vortcert/galerkin.hpp"
#include "vortcert/geometry.hpp"

namespace vortcert {

struct RunConfig {
  DomainSpec domain;
  double mu = 1.0;
  StreamBoundaryData g;
  BoundaryProfile h;
  BasisKind basis = BasisKind::mixed_eigen;
  /// Number of eigenfields; the harmonic extension of h is appended when
  /// `boundary_function` is set.
  int N = 20;
  bool boundary_function = true;
  double ode_tol = 1e-9;
  double fd_step = 1e-4;
  ProbeScheme probe = ProbeScheme::tangent;
  double T_max = 50.0;
  std::optional<double> C2_override;
  std::uint64_t seed = 1;
  Acknowledgments acknowledgments;
  std::string output_dir = "out";
  int max_iter = 50;
  double stop_tol = 1e-10;
  /// Picard steps for the Galerkin initial guess u = P Lambda(u).
  int galerkin_steps = 30;
  int transversality_samples = 256;
  int delta2_probes = 4;
  unsigned threads = 1;

  bool operator==(const RunConfig&) const = default;

  double C2() const { return C2_override.value_or(10.0); }
};

/// Parse and validate; throws Error(ConfigError).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON echo; parse_config(config_json(c)) == c.
std::string config_json(const RunConfig& c);
void validate(const RunConfig& c);
/// FNV-1a 64 of the canonical echo, as 16 hex digits.
std::string config_hash(const RunConfig& c);

/// Independent stream for a named consumer, derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace vortcert
