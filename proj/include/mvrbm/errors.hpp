#pragma once

#include <stdexcept>
#include <string>

namespace mvrbm {

// Exception hierarchy. The CLI maps these onto exit codes:
// UsageError -> 1, SchemaError/ValidationError -> 2, NumericError -> 3.

class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class SchemaError : public ValidationError {
 public:
  explicit SchemaError(const std::string& what) : ValidationError(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mvrbm
