#pragma once

#include <stdexcept>
#include <string>

namespace helipatch {

// Failure categories surfaced by the library.  The CLI maps these to
// one-line machine-parsable error records and a nonzero exit code.
enum class ErrorCode {
  NonSPDInput,
  NonSPDCoefficient,
  InvalidResolution,
  SolverDivergence,
  CoincidentPoints,
  BoundarySource,
  TooClose,
  InfeasibleMass,
  EmptySupport,
  CFLViolation,
  PerturbationInfeasible,
  InvalidArgument,
  IOFailure,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSPDInput: return "NonSPDInput";
    case ErrorCode::NonSPDCoefficient: return "NonSPDCoefficient";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::SolverDivergence: return "SolverDivergence";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::BoundarySource: return "BoundarySource";
    case ErrorCode::TooClose: return "TooClose";
    case ErrorCode::InfeasibleMass: return "InfeasibleMass";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::PerturbationInfeasible: return "PerturbationInfeasible";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace helipatch
