#pragma once

#include <stdexcept>
#include <string>

namespace vmp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A probability (or distribution) outside its admissible range.
class InvalidProbability : public Error {
 public:
  using Error::Error;
};

/// Malformed arguments that are not probabilities: parity, colors, ranges.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A vertex or dependence cone that falls outside the available window.
class WindowError : public Error {
 public:
  using Error::Error;
};

/// An exact enumeration whose state space exceeds the configured cap.
class StateSpaceError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized input (field text, graph JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace vmp
