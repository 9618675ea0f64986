#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ijcomb {

enum class ErrorKind {
  dimension,
  empty_data,
  singular_design,
  divergence,
  estimation,
  singular_covariance,
  negative_variance,
  domain,
  config,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `kind()` is stable and is what the
/// CLI writes into its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SingularCovarianceError : public Error {
 public:
  SingularCovarianceError(const std::string& message, double condition_number)
      : Error(ErrorKind::singular_covariance, message),
        condition_number_(condition_number) {}

  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

}  // namespace ijcomb
