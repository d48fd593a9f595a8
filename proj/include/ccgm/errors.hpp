#pragma once

#include <stdexcept>
#include <string>

namespace ccgm {

/// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,  // violated precondition on user-supplied data or parameters
  Input,            // unreadable or malformed files
  Numerical,        // non-convergence, degenerate spectra, internal checks
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument(const std::string& what) { return {ErrorKind::InvalidArgument, what}; }
inline Error input_error(const std::string& what) { return {ErrorKind::Input, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::Numerical, what}; }

/// Sinkhorn (or any iterative scheme) stopped before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::Numerical, what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A dense computation was requested above its configured size limit.
class SizeLimitError : public Error {
 public:
  explicit SizeLimitError(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

}  // namespace ccgm
