#ifndef RINGLOC_COMMON_LOG_HPP
#define RINGLOC_COMMON_LOG_HPP

#include <memory>

#include <spdlog/spdlog.h>

namespace ringloc {

/// Shared stderr logger. Level comes from RINGLOC_LOG
/// (trace|debug|info|warn|error|off), default warn.
std::shared_ptr<spdlog::logger> logger();

}  // namespace ringloc

#endif  // RINGLOC_COMMON_LOG_HPP
