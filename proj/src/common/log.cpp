#include "ringloc/common/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace ringloc {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto log = spdlog::stderr_color_mt("ringloc");
    log->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    log->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("RINGLOC_LOG")) {
      log->set_level(spdlog::level::from_str(env));
    }
    return log;
  }();
  return instance;
}

}  // namespace ringloc
