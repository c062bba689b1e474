#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latticeq {

/// Invalid configuration: bad dimensions, missing fields, out-of-range parameters.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : std::invalid_argument(what), path_(std::move(path)) {}
  /// JSON-pointer-like path of the offending field, empty when not config-driven.
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A mathematical precondition of an operation does not hold (e.g. z inside the spectrum).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Finite-box dynamics left the box: the evolved state reached the boundary layer.
class ContainmentError : public PreconditionError {
 public:
  ContainmentError(const std::string& what, std::int64_t min_safe_radius)
      : PreconditionError(what), min_safe_radius_(min_safe_radius) {}
  std::int64_t min_safe_radius() const noexcept { return min_safe_radius_; }

 private:
  std::int64_t min_safe_radius_;
};

/// Non-finite values, solver breakdown without a usable fallback.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Site count, dense size or wall-clock cap exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latticeq
