#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace samem {

// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape/dimension violations (mismatched token dimensions, bad indices).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid argument values (bad fractions, zero counts, inconsistent config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Structured failure while decoding a binary trace. Carries the byte offset
// at which decoding stopped.
class TraceParseError : public Error {
 public:
  TraceParseError(const std::string& message, std::size_t offset)
      : Error(message + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Model-output text could not be parsed into an action plan.
class ActionParseError : public Error {
 public:
  using Error::Error;
};

// External annotation service failed (transport error or malformed reply).
class AnnotationError : public Error {
 public:
  using Error::Error;
};

// A replayed decision disagreed with the brute-force reference.
class OracleDivergence : public Error {
 public:
  using Error::Error;
};

}  // namespace samem
