#pragma once

#include <stdexcept>
#include <string>

namespace netlqr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments to a library call (ranges, dimensions, indices).
struct InvalidArgument : Error {
  using Error::Error;
};

// Malformed configuration or input file.
struct ConfigError : Error {
  using Error::Error;
};

// Iterative solver hit its cap or diverged.
struct NonConvergence : Error {
  using Error::Error;
};

// Singular, non-finite, asymmetric or indefinite input to a kernel.
struct NumericalError : Error {
  using Error::Error;
};

// Closed loop with spectral radius at or beyond the stability margin.
struct UnstableError : Error {
  using Error::Error;
};

// Problem too large for a dense path.
struct SizeGuardError : Error {
  using Error::Error;
};

}  // namespace netlqr
