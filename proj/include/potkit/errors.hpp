#pragma once

#include <stdexcept>
#include <string>

namespace potkit {

enum class ErrorKind {
  domain,
  precondition,
  gluing_precondition,
  construction,
  solver,
  estimator,
  evaluation,
  resolution,
  consistency,
  generation,
  usage,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  // Numerical failures map to CLI exit code 3, input problems to 2.
  bool numerical() const {
    return kind_ == ErrorKind::solver || kind_ == ErrorKind::estimator ||
           kind_ == ErrorKind::evaluation || kind_ == ErrorKind::resolution ||
           kind_ == ErrorKind::consistency || kind_ == ErrorKind::construction ||
           kind_ == ErrorKind::generation;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace potkit
