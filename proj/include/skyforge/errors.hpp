#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skyforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgumentError : Error {
  using Error::Error;
};

/// Two sources declare the same non-key attribute.
struct SchemaConflictError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct InapplicableOperatorError : Error {
  using Error::Error;
};

/// The operator would produce an empty dataset.
struct DegenerateStateError : Error {
  using Error::Error;
};

struct BoundViolationError : Error {
  using Error::Error;
};

/// Raised by estimators (timeouts, malformed replies, non-finite values).
/// `bitmap` carries the hex key of the state being valuated when known.
struct EstimatorFailure : Error {
  EstimatorFailure(const std::string& what, std::string bitmap_hex = {})
      : Error(what), bitmap(std::move(bitmap_hex)) {}
  std::string bitmap;
};

struct EnumerationLimitError : Error {
  EnumerationLimitError(const std::string& what, std::size_t bits)
      : Error(what), required_bits(bits) {}
  std::size_t required_bits;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace skyforge
