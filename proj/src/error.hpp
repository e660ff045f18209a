#pragma once

#include <stdexcept>
#include <string>

namespace sandhi {

// Error categories; these map 1:1 onto the C API status codes.
enum class ErrorKind {
  invalid_argument,
  io,
  parse,
  format,
  numeric,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace sandhi
