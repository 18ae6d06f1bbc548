#include "labelsearch/logging.hpp"

#include <cstdlib>
#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace labelsearch {

std::shared_ptr<spdlog::logger> logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> instance;
  std::call_once(once, [] {
    instance = spdlog::stderr_color_mt("labelsearch");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("LABELSEARCH_LOG"); env != nullptr) {
      level = spdlog::level::from_str(env);
    }
    instance->set_level(level);
    instance->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  });
  return instance;
}

}  // namespace labelsearch
