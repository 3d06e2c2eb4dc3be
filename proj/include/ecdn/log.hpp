#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ecdn {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Level comes from the ECDN_LOG environment variable (debug|info|warn|error).
inline LogLevel log_threshold() {
  static LogLevel level = [] {
    const char* env = std::getenv("ECDN_LOG");
    if (!env) return LogLevel::Warn;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    return LogLevel::Warn;
  }();
  return level;
}

template <typename... Args>
void log_at(LogLevel level, const char* fmt, Args... args) {
  if (level < log_threshold()) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::fprintf(stderr, "[%s] ", names[static_cast<int>(level)]);
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

inline void log_at(LogLevel level, const char* msg) { log_at(level, "%s", msg); }

}  // namespace ecdn
