#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rilco {

// Argument outside the mathematical domain of an operation (bad z, bad
// temperature, alpha outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A structural invariant of a data object does not hold (row sums, sizes).
// `invariant()` names the violated rule so the CLI can report it verbatim.
class InvariantError : public std::runtime_error {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trainer/sweep configuration rejected before any work is done.
class ConfigError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

}  // namespace rilco
