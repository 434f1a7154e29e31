#pragma once

#include <stdexcept>
#include <string>

namespace sfod {

/// Input that fails a precondition or schema check. The CLI maps it to exit
/// status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The caller broke an ordering or shape contract (e.g. unsorted predictions).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Failure while running a computation on valid input (divergence, I/O).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfod
