#pragma once

#include <stdexcept>
#include <string>

namespace advprobe {

/// Base for all recoverable library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration document is malformed or violates its schema.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An input artifact (checkpoint, dataset, table) is missing, corrupt or
/// incompatible with the requested operation.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace advprobe
