#pragma once

#include <stdexcept>
#include <string>

namespace rpk {

enum class ErrorKind { Dimension, Parameter, Data, Resource, Numerical, Solver };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};
struct ParameterError : Error {
  explicit ParameterError(const std::string& what) : Error(ErrorKind::Parameter, what) {}
};
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};
struct ResourceError : Error {
  explicit ResourceError(const std::string& what) : Error(ErrorKind::Resource, what) {}
};
struct NumericalBreakdown : Error {
  explicit NumericalBreakdown(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

// Process exit code for each error class (0 is success, 1 is reserved for
// unexpected failures).
constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension:
    case ErrorKind::Data:
      return 2;
    case ErrorKind::Parameter:
      return 3;
    case ErrorKind::Numerical:
    case ErrorKind::Solver:
      return 4;
    case ErrorKind::Resource:
      return 5;
  }
  return 1;
}

}  // namespace rpk
