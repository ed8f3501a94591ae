#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nbnlkit {

/// Base class for all nbnlkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied data that violates an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A caller supplied an out-of-range hyperparameter or configuration value.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// An update or computation produced non-finite values.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A file did not match the expected on-disk format. Carries the byte
/// offset at which parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::uint64_t offset)
      : Error(message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace nbnlkit
