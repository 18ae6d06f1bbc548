#include "labelsearch/errors.hpp"

namespace labelsearch {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kDegenerate: return "degenerate parameters";
    case ErrorKind::kNumerical: return "numerical failure";
  }
  return "error";
}

void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

}  // namespace labelsearch
