#pragma once

#include <stdexcept>
#include <string>

namespace homokin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the admissible range (negative time, p <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Mismatched grids, sizes or mode indices.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace homokin
