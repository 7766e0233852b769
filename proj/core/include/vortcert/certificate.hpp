#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vortcert/constants.hpp"
#include "vortcert/elliptic.hpp"
#include "vortcert/galerkin.hpp"
#include "vortcert/transport.hpp"

namespace vortcert {

enum class Verdict { certified, conditionally_certified, failed };
std::string to_string(Verdict v);

struct Acknowledgments {
  bool sampled_bounds = false;
  bool user_constants = false;
  bool operator==(const Acknowledgments&) const = default;
};

/// Raw measurements of one run; certify() derives the rest of the ledger.
struct CertifyInputs {
  double mu = 1.0;
  bool h_zero = false;
  SupBounds bounds;
  BoundaryNorms h_norms;
  TransversalityReport transversality;
  /// Timeout vertices where Omega_0 is not negligible nearby.
  int relevant_timeouts = 0;
  double normal_lipschitz = 0.0;
  double corridor = 0.0;
  double lambda1 = 0.0;
  Epsilon0Estimate epsilon0;
  std::optional<GammaBound> gamma;
  double A_norm = 0.0;
  double B_U = 0.0;
  double rho = 0.0;
  double C2 = 10.0;
  double delta0 = 0.0;
  double upsilon_residual = 0.0;
  /// delta2 search given (kappa0 * eps0, delta_c); may throw NoNeighborhood.
  std::function<Delta2Result(double, double)> delta2;
  Acknowledgments acks;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct Certificate {
  ConstantsLedger ledger;
  std::vector<CheckRecord> checks;
  double delta0 = 0.0;
  double upsilon_residual = 0.0;
  Verdict verdict = Verdict::failed;
  std::optional<double> conclusion_delta2;
  std::vector<std::string> notes;
  Acknowledgments acks;
  std::uint64_t seed = 0;
  std::string config_hash;

  /// Failed checks, in order.
  std::vector<std::string> failing() const;
  /// Verdict counts as a pass for the CLI: certified, or conditional with
  /// every downgrade acknowledged.
  bool accepted() const;
};

/// Constants that must be present before a positive verdict is issued.
const std::vector<std::string>& required_constants();

Certificate certify(const CertifyInputs& in);

std::string certificate_json(const Certificate& c);
/// Inverse of certificate_json; throws IoError on malformed input.
Certificate parse_certificate_json(const std::string& text);
std::string certificate_text(const Certificate& c);

}  // namespace vortcert
