#pragma once

#include <stdexcept>
#include <string>

namespace oswitch {

// Error categories double as the CLI exit-code contract.
enum class ErrorKind {
  internal = 1,
  config = 2,
  geometry = 3,
  stability = 4,
  capability = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Malformed input: dimension mismatch, bad config, invalid stochastic matrix.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Domain empty, interior empty, point outside the slice, construction impossible.
struct GeometryError : Error {
  explicit GeometryError(const std::string& what) : Error(ErrorKind::geometry, what) {}
};

/// Numerical refusal: Picard non-contraction, non-convergence, coarse grids.
struct StabilityError : Error {
  explicit StabilityError(const std::string& what) : Error(ErrorKind::stability, what) {}
};

/// Requested operation is outside what the component supports for this input.
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& what) : Error(ErrorKind::capability, what) {}
};

}  // namespace oswitch
