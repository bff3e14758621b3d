#pragma once

#include <stdexcept>
#include <string>

namespace slotfill {

/// Malformed or inconsistent input data (files, model JSON, corpus contents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or option values supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace slotfill
