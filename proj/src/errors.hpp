#pragma once

#include <stdexcept>
#include <string>

namespace lrgae {

// Base class for all engine errors. Subclasses map 1:1 onto the C API
// status codes in include/lrgae.h.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An input value is outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An index is out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an API call was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A configuration file or block failed validation. Messages name the
// offending field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem problem (missing file, unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. Messages carry the line number when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid data (e.g. edge endpoint beyond the node count).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A sampling request cannot be satisfied by the graph (e.g. not enough
// non-edges to draw negatives from).
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrgae
