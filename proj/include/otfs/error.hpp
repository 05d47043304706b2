#pragma once

#include <stdexcept>
#include <string>

namespace otfs {

// Caller passed something outside an operation's contract.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data is unusable: parse failures, ragged rows, empty classes,
// degenerate matrices that cannot be scaled.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver gave up before reaching its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace otfs
