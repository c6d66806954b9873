#pragma once

#include <stdexcept>
#include <string>

namespace stratinv {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Validation,
  SolverLimit,
  SolverFailure,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stratinv
