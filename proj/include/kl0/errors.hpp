#pragma once

#include <stdexcept>
#include <string>

namespace kl0 {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs outside the admissible set (M <= 1, p outside (d,d+1), ...).
struct DomainError : Error {
  using Error::Error;
};

// Numeric failures: quadrature did not settle, integrand blew up,
// a ball that must exclude zero did not.
struct NumericError : Error {
  using Error::Error;
};

struct ConvergenceError : NumericError {
  ConvergenceError(const std::string& what, std::string best_value, std::string best_err)
      : NumericError(what + " (best " + best_value + " +/- " + best_err + ")"),
        best_value(std::move(best_value)),
        best_err(std::move(best_err)) {}
  std::string best_value;
  std::string best_err;
};

struct IntegrandError : NumericError {
  using NumericError::NumericError;
};

struct CertificateError : NumericError {
  using NumericError::NumericError;
};

}  // namespace kl0
