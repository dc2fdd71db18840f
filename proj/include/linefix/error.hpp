#pragma once

#include <stdexcept>
#include <string>

namespace linefix {

// Malformed input data: bad JSONL, unknown symbols, inconsistent files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad invocation of a command: missing options, empty grids.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace linefix
