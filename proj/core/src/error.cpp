#include "vortcert/error.hpp"

namespace vortcert {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDomain: return "InvalidDomain";
    case ErrorKind::MeshFailure: return "MeshFailure";
    case ErrorKind::MeshMismatch: return "MeshMismatch";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::PowerIterationStagnant: return "PowerIterationStagnant";
    case ErrorKind::TraceFailure: return "TraceFailure";
    case ErrorKind::DegenerateExit: return "DegenerateExit";
    case ErrorKind::TransversalityLost: return "TransversalityLost";
    case ErrorKind::NonTransversal: return "NonTransversal";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::NoMargin: return "NoMargin";
    case ErrorKind::NoNeighborhood: return "NoNeighborhood";
    case ErrorKind::NeighborhoodExit: return "NeighborhoodExit";
    case ErrorKind::LedgerIncomplete: return "LedgerIncomplete";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace vortcert
