#pragma once

#include "flab/cli/config.hpp"
#include "flab/cli/report.hpp"

namespace flab::cli {

enum ExitCode : int {
  exit_pass = 0,
  exit_assertion_failure = 1,
  exit_config_error = 2,
  exit_numerical_error = 3,
};

/// Validates all parameters of the selected experiment, then computes. Throws
/// ConfigError before any computation when the configuration is invalid and
/// lets flab::NumericalError propagate. The timestamp is left empty.
Report run(const RunConfig& config);

/// Cross-validation of finite-n symmetric-sector spectra against the Fock
/// limit; the `compare` experiment.
Report compare(const RunConfig& config);

inline int exit_code(const Report& r) { return r.all_pass() ? exit_pass : exit_assertion_failure; }

json config_echo(const RunConfig& config);

}  // namespace flab::cli
