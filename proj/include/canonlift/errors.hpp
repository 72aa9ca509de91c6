#pragma once

#include <stdexcept>
#include <string>

namespace canonlift {

/// Operands live in different ambient dimensions or have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the chart or profile domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Singular or indefinite matrix where a positive definite one is required.
class LinearAlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructor could not certify the identity it is contracted to satisfy.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Refusal to lift an immersion whose canonical section is not parallel.
class MinimalityGateError : public std::runtime_error {
 public:
  MinimalityGateError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Bad user configuration (maps to exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace canonlift
