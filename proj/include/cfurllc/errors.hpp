#pragma once

#include <stdexcept>
#include <string>

namespace cfurllc {

// Malformed or inconsistent configuration (bad key, bad value, violated
// structural invariant such as K >= N for zero-forcing).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function. Carries the
// offending boundary when one exists.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what, double boundary = 0.0)
      : std::domain_error(what), boundary_(boundary) {}
  double boundary() const noexcept { return boundary_; }

 private:
  double boundary_;
};

// A per-device rate requirement cannot be met at any SINR.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The GP modelling layer was handed an expression outside the
// generalized-posynomial class.
class ModelingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cfurllc
