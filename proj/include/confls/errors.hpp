#pragma once

#include <stdexcept>
#include <string>

namespace confls {

// Malformed or inconsistent input data (files, tables, datasets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or parameters during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace confls
