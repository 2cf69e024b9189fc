#pragma once

#include <stdexcept>
#include <string>

namespace emorec {

// Error taxonomy shared by the library and the CLI. The exit code is the
// process status the CLI maps each class to: 1 = I/O, 2 = validation or
// configuration, 3 = numerical failure.
class Error : public std::runtime_error {
 public:
  Error(const std::string& message, int exit_code)
      : std::runtime_error(message), exit_code_(exit_code) {}

  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(message, 1) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error(message, 2) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(message, 2) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error(message, 2) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error(message, 3) {}
};

}  // namespace emorec
