#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scenefill {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or argument values (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

/// Bad data: malformed files, mismatched dimensions, degenerate inputs (exit code 3).
struct DataError : Error {
  using Error::Error;
};

struct DimensionError : DataError {
  using DataError::DataError;
};

/// File parse failure. `kind` is a stable machine-checkable tag, `offset` the
/// byte position where parsing stopped.
struct ParseError : DataError {
  std::string kind;
  std::size_t offset;

  ParseError(std::string kind_, std::size_t offset_, const std::string& detail)
      : DataError(kind_ + " at byte " + std::to_string(offset_) + ": " + detail),
        kind(std::move(kind_)),
        offset(offset_) {}
};

struct IoError : DataError {
  using DataError::DataError;
};

}  // namespace scenefill
