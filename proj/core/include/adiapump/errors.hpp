#pragma once

#include <stdexcept>
#include <string>

namespace adiapump {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct BandEdgeError : Error {
  using Error::Error;
};
struct SingularMatchingError : Error {
  using Error::Error;
};
struct DerivativeUnstableError : Error {
  using Error::Error;
};
struct NonUnitaryInputError : Error {
  using Error::Error;
};
struct QuadratureNotConvergedError : Error {
  using Error::Error;
};
struct GridTooCoarseError : Error {
  using Error::Error;
};
struct PhaseUnwrapAmbiguousError : Error {
  using Error::Error;
};
struct AmmeterOutOfRangeError : Error {
  using Error::Error;
};
struct PlanViolationError : Error {
  using Error::Error;
};
struct LinearSolveError : Error {
  using Error::Error;
};
struct EmptyWindowError : Error {
  using Error::Error;
};
struct UnsupportedFunctionError : Error {
  using Error::Error;
};
struct ConfigInvalidError : Error {
  using Error::Error;
};
struct ModelInvalidError : Error {
  using Error::Error;
};
struct MismatchedRunsError : Error {
  using Error::Error;
};
struct TimeBudgetError : Error {
  using Error::Error;
};

}  // namespace adiapump
