#pragma once

#include <stdexcept>
#include <string>

namespace gmrbm {

// Caller passed inconsistent dimensions, out-of-range indices or bad options.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (files, datasets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Brute-force enumeration refused because q^m exceeds the configured cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite gradient or parameter.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gmrbm
