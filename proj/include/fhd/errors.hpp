#pragma once

#include <stdexcept>
#include <string>

namespace fhd {

// Process exit codes shared by the CLI subcommands.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_blowup = 3,
  exit_audit = 4,
};

// Rejected configuration, malformed input file, or failed hypothesis validation.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite value produced while assembling a tendency; message names the term.
class BlowUpError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stable step size underflowed (dt < 1e-12).
class StiffnessError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A run completed but violated a validity bound (e.g. clipped too much mass).
class InvalidRunError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An energy-budget or weak-identity audit failed its tolerance.
class AuditError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fhd
