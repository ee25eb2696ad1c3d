#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modcomp {

/// Invalid configuration value or violated precondition on user input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mismatched vector/matrix dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A diagnostic could not be computed from the information available.
class DiagnosticUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or incompatible file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training or a simulated recurrence left the finite range.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace modcomp
