#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace flywheel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration; rejected before any computation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An integral did not converge, or a quadrature self-check (sum rule) failed.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluation routes of the same quantity disagree.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state in the stochastic integrator.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::uint64_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

/// Phase-space samples fall outside the histogram grid.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Number-basis truncation too small for the reconstructed state.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A quantity that is undefined for the given input (e.g. g2 of the vacuum).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace flywheel
