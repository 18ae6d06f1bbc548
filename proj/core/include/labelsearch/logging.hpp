#pragma once

#include <memory>

namespace spdlog {
class logger;
}

namespace labelsearch {

/// Shared logger writing to stderr. The level is read once from the
/// LABELSEARCH_LOG environment variable (trace, debug, info, warn, error,
/// off); the default is warn.
std::shared_ptr<spdlog::logger> logger();

}  // namespace labelsearch
