#pragma once

#include <stdexcept>
#include <string>

namespace flaghp {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, ranges or configuration values (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem and format failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flaghp
