#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oodknn {

enum class ErrorKind {
  Config,      // bad parameters, missing manifest roles, k out of range
  Io,          // file missing, unreadable, unwritable
  Format,      // bad magic, unknown version, unparsable text
  Corruption,  // header dims disagree with payload length
  Validation,  // non-finite entries, zero-norm rows, unnormalized inputs
  Shape,       // dimensionality mismatch between operands
  Input,       // empty or NaN score sets
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace oodknn
