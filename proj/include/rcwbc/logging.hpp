#pragma once

#include <spdlog/spdlog.h>

#include <memory>
#include <string_view>

namespace rcwbc::log {

/// Library logger writing to stderr. Level from RCWBC_LOG_LEVEL
/// (error, warn, info, debug); default warn.
spdlog::logger& logger();

/// Overrides the level; unknown names leave it unchanged and return false.
bool set_level(std::string_view name);

}  // namespace rcwbc::log
