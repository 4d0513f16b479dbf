#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conevol {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration or sweep cap.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::size_t iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

/// Operation not defined for the given cone variant.
class UnsupportedVariant : public Error {
 public:
  using Error::Error;
};

/// Estimator guard tripped (dimension cap, conditioning, empty reservoir).
class GuardError : public Error {
 public:
  using Error::Error;
};

/// Tail bounds requested for a cone whose intrinsic volume is deterministic.
class DegenerateCone : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace conevol
