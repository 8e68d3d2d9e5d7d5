#pragma once

#include <iostream>
#include <string>

namespace gazekex {

enum class LogLevel { kQuiet = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline LogLevel& log_level() {
  static LogLevel level = LogLevel::kWarn;
  return level;
}

inline void log_warn(const std::string& msg) {
  if (log_level() >= LogLevel::kWarn) std::cerr << "[warn] " << msg << "\n";
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::cerr << "[info] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) std::cerr << "[debug] " << msg << "\n";
}

}  // namespace gazekex
