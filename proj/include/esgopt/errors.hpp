#pragma once

#include <stdexcept>
#include <string>

namespace esg {

// Parameter record violates a range or shape constraint.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, int index, const std::string& what)
      : std::invalid_argument(index >= 0 ? field + "[" + std::to_string(index) + "]: " + what
                                         : field + ": " + what),
        field_(std::move(field)),
        index_(index) {}

  const std::string& field() const noexcept { return field_; }
  // -1 for scalar fields.
  int index() const noexcept { return index_; }

 private:
  std::string field_;
  int index_;
};

// Malformed configuration text (syntax, unknown or missing keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solve that should succeed for valid inputs did not.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace esg
