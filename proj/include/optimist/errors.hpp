#pragma once

#include <stdexcept>
#include <string>

namespace optimist {

// Array dimensions that do not agree with each other.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation
// (zero reference entry for a smoothed divergence, delta outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative routine that failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Brute-force oracle asked to enumerate more than its budget allows.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad experiment configuration or unknown identifiers.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A hard run-time guarantee (pigeonhole bound, Gram positivity, stage
// normalisation, value clipping, ...) was violated.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace optimist
