#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace spr {

// Log level comes from the SPR_LOG environment variable: error, warn, info
// (default), debug.
enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SPR_LOG");
    if (!env) return LogLevel::kInfo;
    const std::string v(env);
    if (v == "error") return LogLevel::kError;
    if (v == "warn") return LogLevel::kWarn;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

inline void log(LogLevel level, const std::string& msg) {
  if (level > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[spr:" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

inline void log_info(const std::string& msg) { log(LogLevel::kInfo, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::kWarn, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::kDebug, msg); }
inline void log_error(const std::string& msg) { log(LogLevel::kError, msg); }

}  // namespace spr
