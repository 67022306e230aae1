#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tsync {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside the domain of a closed-form model (negative length, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonInvertible : public Error {
 public:
  using Error::Error;
};

class SchedulingInPast : public Error {
 public:
  using Error::Error;
};

class CompensateTwice : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario or topology. `path()` points at the offending field,
/// e.g. "machines[1].sensors[0].rate_hz"; it is empty for whole-document errors.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Two sensor rates that violate the shared-timer divisibility rule.
class RateError : public ConfigError {
 public:
  RateError(std::string path, std::string first, std::string second, const std::string& message)
      : ConfigError(std::move(path), message),
        first_(std::move(first)),
        second_(std::move(second)) {}

  const std::string& first() const noexcept { return first_; }
  const std::string& second() const noexcept { return second_; }

 private:
  std::string first_;
  std::string second_;
};

}  // namespace tsync
