#pragma once

#include <stdexcept>
#include <string>

namespace lrvec {

/// Malformed input: empty data, shape mismatch, invalid configuration.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter point outside the model's open parameter space.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A simulation study exceeded its replicate-failure budget.
class StudyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lrvec
