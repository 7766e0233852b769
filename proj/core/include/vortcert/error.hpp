#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vortcert {

enum class ErrorKind {
  InvalidDomain,
  MeshFailure,
  MeshMismatch,
  SolverFailure,
  EigenFailure,
  PowerIterationStagnant,
  TraceFailure,
  DegenerateExit,
  TransversalityLost,
  NonTransversal,
  SingularJacobian,
  NoMargin,
  NoNeighborhood,
  NeighborhoodExit,
  LedgerIncomplete,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` carries the failure class
/// so callers (the CLI in particular) can map it onto exit codes or verdicts.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace vortcert
