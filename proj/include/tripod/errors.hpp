#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tripod {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Configuration validation failure carrying every violated invariant.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, std::vector<std::string> violations)
      : Error(msg), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class InvalidGrid : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidDrive : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidParams : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class OutOfRangeAngle : public Error {
 public:
  using Error::Error;
};

class InvalidLambda : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Excitation-balance residual exceeded the stage tolerance.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// Weighted cycle kernel failed the symmetry gate (wrong composition).
class AsymmetricKernel : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tripod
