#pragma once

#include <stdexcept>
#include <string>

namespace fplab {

/// Parameter outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical certificate (bound, inequality, monotonicity) did not hold.
class CertificateError : public std::runtime_error {
 public:
  explicit CertificateError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation could not complete: overflow, normalization failure,
/// solver iteration cap, rejection-sampling trial cap.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fplab
