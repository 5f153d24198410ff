#pragma once

#include <stdexcept>
#include <string>

namespace chj {

/// Evaluation requested outside a model's validity box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A model whose construction data violates its own contract (e.g. B <= 0).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sampled data that is not convex beyond tolerance.
class ConvexityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or invalid scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time step violates a stability bound.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf or overflow during a numerical update.
class BlowUpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No admissible multiplier enforces the constraint.
class InfeasibleError : public std::runtime_error {
 public:
  enum class Cause { growth_too_strong, decay_too_strong, flat };

  InfeasibleError(Cause cause, const std::string& what)
      : std::runtime_error(what), cause_(cause) {}

  Cause cause() const noexcept { return cause_; }

 private:
  Cause cause_;
};

/// The truncated domain is too small for the requested operation.
class DomainTooSmallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requires data the run did not record.
class UnsupportedRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A route failed mid-run; the message carries route and time context.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chj
