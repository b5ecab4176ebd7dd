#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radsearch {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raster dimensions are too small or do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the raster's value kind (e.g. mean of labels).
class KindError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// File could not be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class DegenerateDisparityError : public Error {
 public:
  using Error::Error;
};

/// Detector closer to a source than the minimum modelled distance.
class ProximityError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Test statistic undefined (zero pooled variance with equal means).
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

/// Planner endpoint lies on a non-traversable or out-of-grid node.
class EndpointError : public Error {
 public:
  using Error::Error;
};

/// No path exists. `frontier_size()` is the number of nodes reached before exhaustion.
class NoPathError : public Error {
 public:
  explicit NoPathError(std::size_t frontier_size)
      : Error("no path to goal; search exhausted after reaching " +
              std::to_string(frontier_size) + " nodes"),
        frontier_size_(frontier_size) {}
  std::size_t frontier_size() const noexcept { return frontier_size_; }

 private:
  std::size_t frontier_size_;
};

/// Caller broke a documented precondition (non-adjacent nodes, etc.).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

}  // namespace radsearch
