#pragma once

#include <stdexcept>
#include <string>

namespace errql {

// Base class for all toolkit errors. Messages carry the locus (file, line
// number, field) whenever one is known.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input that could not be parsed (bad JSON line, unrecognized
// diagnostic block, bad timestamp, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally parseable input that violates a domain invariant
// (e.g. compile_ok with nonempty diagnostics, exam grade out of range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or unusable configuration (unknown format, missing model
// inputs, degenerate synthesis parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical preconditions not met (rank-deficient design, degenerate scale).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace errql
