#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace hk {

// Verbosity from the HK_LOG environment variable: error (default), info,
// debug. Diagnostics always go to stderr, never stdout.
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("HK_LOG");
    if (env == nullptr) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

template <typename... Args>
void log_at(LogLevel lvl, const char* tag, const char* fmt, Args... args) {
  if (log_level() < lvl) return;
  std::fprintf(stderr, "[hk %s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

template <typename... Args>
void log_error(const char* fmt, Args... args) {
  log_at(LogLevel::Error, "error", fmt, args...);
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
  log_at(LogLevel::Info, "info", fmt, args...);
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
  log_at(LogLevel::Debug, "debug", fmt, args...);
}

}  // namespace hk
