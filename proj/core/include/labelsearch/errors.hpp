#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace labelsearch {

enum class ErrorKind {
  kConfig,      // invalid parameters or inconsistent inputs
  kFormat,      // malformed files
  kData,        // well-formed files with invalid content (NaN, zero rows)
  kIo,          // filesystem failures
  kDegenerate,  // rank-deficient task-encoder parameters
  kNumerical,   // divergence inside an optimizer
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace labelsearch
