#include "rcwbc/logging.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string>

namespace rcwbc::log {

namespace {

bool parse_level(std::string_view name, spdlog::level::level_enum& out) {
  if (name == "error") out = spdlog::level::err;
  else if (name == "warn") out = spdlog::level::warn;
  else if (name == "info") out = spdlog::level::info;
  else if (name == "debug") out = spdlog::level::debug;
  else return false;
  return true;
}

std::shared_ptr<spdlog::logger> make_logger() {
  auto l = std::make_shared<spdlog::logger>("rcwbc", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
  l->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("RCWBC_LOG_LEVEL")) parse_level(env, level);
  l->set_level(level);
  return l;
}

}  // namespace

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = make_logger();
  return *instance;
}

bool set_level(std::string_view name) {
  spdlog::level::level_enum level;
  if (!parse_level(name, level)) return false;
  logger().set_level(level);
  return true;
}

}  // namespace rcwbc::log
