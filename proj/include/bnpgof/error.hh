// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bnpgof {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A measure, partition or option violates its invariants.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Some hypothesized bin has probability zero; merge bins or repartition.
class ZeroExpectedBin : public Error {
 public:
  using Error::Error;
};

// A row or column margin of a contingency grid is zero.
class ZeroMargin : public Error {
 public:
  using Error::Error;
};

// Every Gamma variate of a weight draw underflowed.
class DegenerateDraw : public Error {
 public:
  using Error::Error;
};

// Calibration target cannot be met inside the search bracket.
class BracketFailure : public Error {
 public:
  using Error::Error;
};

// Command-line or configuration problem.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A replicate task failed; carries the replicate index.
class ReplicateError : public Error {
 public:
  ReplicateError(std::size_t index, const std::string& what)
      : Error("replicate " + std::to_string(index) + ": " + what),
        index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace bnpgof
