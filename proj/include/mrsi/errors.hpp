#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mrsi {

// Input validation failures. The CLI maps these to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Schema violation in a JSON document; path() is a JSON pointer to the key.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string path, const std::string& what)
      : InvalidArgument(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Numerical failures. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySignalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedRatioError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateSampleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedCorrelationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptyRoiError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mrsi
