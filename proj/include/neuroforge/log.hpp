#ifndef NEUROFORGE_LOG_HPP
#define NEUROFORGE_LOG_HPP

#include <string>

namespace neuroforge {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Threshold from NEUROFORGE_LOG ("error" | "info" | "debug"), read once per
// process; unset or unrecognized values mean "error".
LogLevel log_threshold();

// Writes "[level] message\n" to stderr when `level` passes the threshold.
void log_message(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log_message(LogLevel::Error, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::Debug, m); }

}  // namespace neuroforge

#endif
