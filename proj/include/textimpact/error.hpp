#pragma once

#include <stdexcept>
#include <string>

namespace textimpact {

// Broad failure classes. Each maps onto one CLI exit code.
enum class ErrorKind {
  ConfigInvalid = 2,
  MissingArtifact = 3,
  DataError = 4,
  NumericalError = 5,
};

// All library failures are reported through this exception. `code()` is a
// short stable identifier (e.g. "BadLabel", "SingularSystem") suitable for
// machine-readable error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error data_error(std::string code, const std::string& message) {
  return Error(ErrorKind::DataError, std::move(code), message);
}

inline Error config_error(std::string code, const std::string& message) {
  return Error(ErrorKind::ConfigInvalid, std::move(code), message);
}

inline Error numerical_error(std::string code, const std::string& message) {
  return Error(ErrorKind::NumericalError, std::move(code), message);
}

inline const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::DataError: return "DataError";
    case ErrorKind::NumericalError: return "NumericalError";
  }
  return "Unknown";
}

}  // namespace textimpact
