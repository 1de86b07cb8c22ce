#pragma once

#include <stdexcept>
#include <string>

namespace spr {

// Shape/precondition violations (bad dims, invalid hyperparameter ranges).
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Runtime numeric failures (divergence, contract violations on data).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// I/O failures (bad magic, truncated files, unwritable paths).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spr
