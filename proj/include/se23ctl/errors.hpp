#pragma once

#include <stdexcept>
#include <string>

namespace se23ctl {

/// Input outside the domain of a closed form (e.g. the 2*pi pole of S_l).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Logarithm requested too close to the rotation angle pi.
class BranchError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed argument (non-skew matrix, non-unit axis, non-SPD gain...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Near-singular solve inside the controller.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file schema or validation failure. `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace se23ctl
