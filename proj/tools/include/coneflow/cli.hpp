#pragma once

// Run configuration, scenario orchestration and the exit-code contract.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coneflow/textio.hpp"

namespace coneflow::cli {

enum class Scenario { onedim_blowup, axis_onedim, elliptic_validate, axisym_blowup, axisym_noswirl };
const char* to_string(Scenario scenario);

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,        ///< validation failed or unclassified error
  kExitConfig = 2,         ///< bad configuration or parameter
  kExitBlowup = 3,         ///< blow-up detected
  kExitCflExhausted = 4,   ///< time step collapsed below dt_floor
  kExitSolverFailure = 5,  ///< elliptic solve, resonance, truncation or support escape
  kExitIo = 6,             ///< output directory or input file unusable
};

struct RunConfig {
  Scenario scenario = Scenario::onedim_blowup;
  double epsilon = 1.0;
  int n = 513;
  int nr = 256;
  int ntheta = 128;
  double r_max = 4.0;
  double r_min = 4e-4;
  double grading = 0.0;  ///< > 0 picks nr from the grading ratio
  double alpha = 0.5;
  double dt_ceiling = 1e-2;
  double dt_floor = 1e-10;
  std::optional<double> t_end;  ///< unset: scenario default
  double t_end_fraction = 0.95;  ///< axisym-blowup without t_end: this times the 1D T*
  double cfl = 0.0;              ///< 0: scenario default
  double blowup_factor = 1e6;
  int record_every = 1;
  int snapshot_every = 0;
  std::string preset = "paper-blowup";  ///< paper-blowup | sine | custom
  std::filesystem::path initial_data;   ///< CSV theta,g,P for preset custom
  double amplitude = 1.0;               ///< preset sine
  double orientation = -1.0;            ///< axisym-blowup embeds orientation * (g, P)
  int partner_n = 0;                    ///< 1D partner nodes; 0: ntheta
  std::string advection = "upwind";
  std::string interpolation = "cubic";
  int levels = 3;
  std::filesystem::path out = "out";
};

/// Every knob as key=value, in a fixed order.
KeyValues to_key_values(const RunConfig& config);

/// Names accepted in config files and in --sweep.
const std::vector<std::string>& config_keys();

struct ConfigSources {
  std::optional<std::filesystem::path> file;
  KeyValues flags;  ///< same key names as the file
  bool strict = true;
};

struct ParsedConfig {
  RunConfig config;
  std::vector<std::string> warnings;
};

/// File values first, then flags. A flag that changes a file value wins and
/// adds a warning. Unknown keys throw ConfigError naming the key (strict) or
/// add a warning. Scenario defaults fill keys neither source sets.
ParsedConfig parse_config(const ConfigSources& sources);

/// Applies one key to a config; throws ConfigError or InvalidParameter
/// naming the key.
void set_key(RunConfig& config, const std::string& key, const std::string& value);

/// Cross-field checks; throws naming the offending key.
void validate(const RunConfig& config);

/// Runs one scenario. Artifacts land in config.out; the returned code follows
/// ExitCode. Errors are reported on `log`, never thrown.
int run(const RunConfig& config, std::ostream& log);

struct Sweep {
  std::string key;
  std::vector<std::string> values;
};

/// "key=v1,v2,..."; throws ConfigError("sweep") when malformed.
Sweep parse_sweep(const std::string& spec);

/// One run per value, each parsed from `base` plus key=value and written to
/// <out>/<key>=<value>, up to `workers` at a time. Writes <out>/sweep.csv.
/// Returns 0 when every run ended with 0 or kExitBlowup, otherwise the
/// largest other code.
int run_sweep(const ConfigSources& base, const Sweep& sweep, unsigned workers, std::ostream& log);

/// Exit code for an exception escaping a run.
int exit_code_for(const std::exception& e);

}  // namespace coneflow::cli
