#pragma once

#include <stdexcept>
#include <string>

namespace exactdif {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Stable machine-readable category used in CLI error JSON.
  virtual const char* kind() const noexcept { return "error"; }
};

/// A caller violated a documented precondition (bad shape, bad level, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse_error"; }
};

/// A Groebner/Markov basis computation exceeded its configured resource cap.
class BasisTooLarge : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "basis_too_large"; }
};

/// The maximum likelihood estimate does not exist for the requested model.
class MleNonexistent : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "mle_nonexistent"; }
};

/// Fiber enumeration hit its cap, so the requested exact quantity is unavailable.
class EnumerationTruncated : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "enumeration_truncated"; }
};

}  // namespace exactdif
