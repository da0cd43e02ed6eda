#pragma once

#include <stdexcept>
#include <string>

namespace coneflow {

enum class ErrorKind {
  invalid_parameter,
  invalid_input,
  resonance,
  step_rejected,
  singularity,
  domain,
  truncation,
  no_blowup,
  insufficient_resolution,
  support_escape,
  solver_failure,
  synchronization,
  config,
  io,
};

const char* to_string(ErrorKind kind);

/// Base of every error thrown by the library. The kind survives type erasure
/// so the CLI can map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
 public:
  InvalidParameter(std::string name, const std::string& detail)
      : Error(ErrorKind::invalid_parameter, "invalid parameter '" + name + "': " + detail),
        name_(std::move(name)) {}

  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class StepRejected : public Error {
 public:
  StepRejected(double admissible_dt, const std::string& detail)
      : Error(ErrorKind::step_rejected, detail), admissible_dt_(admissible_dt) {}

  [[nodiscard]] double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double admissible_dt_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& detail)
      : Error(ErrorKind::config, detail), key_(std::move(key)) {}

  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace coneflow
