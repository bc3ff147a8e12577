#include "neuroforge/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace neuroforge {

LogLevel log_threshold() {
  static const LogLevel threshold = [] {
    const char* v = std::getenv("NEUROFORGE_LOG");
    if (v && std::strcmp(v, "debug") == 0) return LogLevel::Debug;
    if (v && std::strcmp(v, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return threshold;
}

void log_message(LogLevel level, const std::string& message) {
  if (level > log_threshold()) return;
  const char* tag = level == LogLevel::Error  ? "error"
                    : level == LogLevel::Info ? "info"
                                              : "debug";
  std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}

}  // namespace neuroforge
