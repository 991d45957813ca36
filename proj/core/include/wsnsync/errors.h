#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wsnsync {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sensor sample outside the DHT22 measurement range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Record id 0 used where a transmitted id is required.
class IdError : public Error {
 public:
  using Error::Error;
};

// Counter storage could not be read, parsed or written.
class StorageError : public Error {
 public:
  using Error::Error;
};

// Same packet identity seen with a different payload.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Malformed store or manifest file. Carries the 1-based line number when the
// problem is attributable to one line (0 otherwise).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A sync plan names a record its source store does not hold.
class MissingSourceError : public Error {
 public:
  using Error::Error;
};

// Invalid scenario or command configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsnsync
