#ifndef RIESZHEAT_ERRORS_HPP
#define RIESZHEAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rieszheat {

/// Argument outside the admissible domain (t <= 0, beta out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature or linear-algebra failure. `diagnostics()` carries the
/// estimate/error pair or the offending matrix entry.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::string diagnostics)
      : std::runtime_error(what + " [" + diagnostics + "]"),
        diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

/// A time step produced a non-finite value.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(long cell, int component, double t)
      : std::runtime_error("non-finite field value at cell " + std::to_string(cell) +
                           ", component " + std::to_string(component) +
                           ", t = " + std::to_string(t)),
        cell_(cell), component_(component), t_(t) {}

  long cell() const noexcept { return cell_; }
  int component() const noexcept { return component_; }
  double time() const noexcept { return t_; }

 private:
  long cell_;
  int component_;
  double t_;
};

/// Invalid user configuration (CLI maps this to exit status 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rieszheat

#endif  // RIESZHEAT_ERRORS_HPP
