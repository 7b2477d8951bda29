#pragma once

#include <iostream>
#include <string>

namespace curvgad {

enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel& log_level() {
  static LogLevel level = LogLevel::warn;
  return level;
}

inline void log_warn(const std::string& msg) {
  if (log_level() >= LogLevel::warn) std::cerr << "[warn] " << msg << '\n';
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::cerr << "[info] " << msg << '\n';
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::cerr << "[debug] " << msg << '\n';
}

}  // namespace curvgad
