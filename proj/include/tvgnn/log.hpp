#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace tvgnn {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

// TVGNN_LOG in {quiet, info, debug}; default info.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("TVGNN_LOG");
    if (!env) return LogLevel::kInfo;
    const std::string s(env);
    if (s == "quiet") return LogLevel::kQuiet;
    if (s == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::cerr << "[info] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) std::cerr << "[debug] " << msg << "\n";
}

}  // namespace tvgnn
