#include "coneflow/error.hpp"

namespace coneflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::step_rejected: return "step-rejected";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::domain: return "domain";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::no_blowup: return "no-blowup-detected";
    case ErrorKind::insufficient_resolution: return "insufficient-resolution";
    case ErrorKind::support_escape: return "support-escape";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::synchronization: return "synchronization";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace coneflow
