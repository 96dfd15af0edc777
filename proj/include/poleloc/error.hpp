#pragma once

#include <stdexcept>
#include <string>

namespace poleloc {

enum class ErrorCode {
  kInvalidArgument,
  kDomain,
  kIo,
  kConfig,
  kNumerical,
  kNoGroundFound,
  kInsufficientPoints,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::kDomain, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

// Carries the filter timestamp at which the estimate stopped being finite.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double timestamp)
      : Error(ErrorCode::kNumerical, what), timestamp_(timestamp) {}

  double timestamp() const noexcept { return timestamp_; }

 private:
  double timestamp_;
};

}  // namespace poleloc
