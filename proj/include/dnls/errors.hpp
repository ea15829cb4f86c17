#pragma once

#include <stdexcept>
#include <string>

namespace dnls {

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitPartial = 4 };

// Bad parameters, grid mismatch, malformed config.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Leaving the numerical regime: non-convergence, blow-up proxy, conservation breach.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dnls
