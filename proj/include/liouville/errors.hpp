#pragma once

#include <stdexcept>
#include <string>

namespace liouville {

/// Bad user input (config files, CLI arguments, malformed mesh files).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A documented precondition of an operation was violated.
struct PreconditionError : std::invalid_argument {
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure failed (singular solve, eigensolver stall, ...).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace liouville
