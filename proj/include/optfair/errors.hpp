#pragma once

#include <stdexcept>
#include <string>

namespace optfair {

// Bad inputs, configs, or preconditions. The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Too few usable observations for a statistical procedure.
class InsufficientDataError : public ValidationError {
 public:
  explicit InsufficientDataError(const std::string& what) : ValidationError(what) {}
};

// Operation not defined for the given algorithm.
class UnsupportedAlgorithmError : public ValidationError {
 public:
  explicit UnsupportedAlgorithmError(const std::string& what) : ValidationError(what) {}
};

// Quantity mathematically undefined at the given parameters (e.g. 0/0).
class UndefinedValueError : public std::domain_error {
 public:
  explicit UndefinedValueError(const std::string& what) : std::domain_error(what) {}
};

// Non-finite values, divergence, and other runtime numeric failures. Exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// File and parse failures; messages carry row/column context. Exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace optfair
