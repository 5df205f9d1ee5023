#pragma once

#include <stdexcept>
#include <string>

namespace ummi {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  Ok = 0,
  ConfigError = 2,
  DataError = 3,
  MetricUndefined = 4,
  SelfcheckFailed = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed schema/partition/flags.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::ConfigError, what) {}
};

// Input files that do not parse or do not conform to the schema.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::DataError, what) {}
};

// Every conditioning set of a metric was empty.
class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& what) : Error(ExitCode::MetricUndefined, what) {}
};

}  // namespace ummi
