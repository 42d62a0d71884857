#pragma once

#include <string>

namespace clvboost {

enum class LogLevel { kDebug = 0, kInfo, kWarn, kError, kOff };

/// Level comes from the CLVBOOST_LOG environment variable
/// (debug|info|warn|error|off), read once; default is warn.
LogLevel log_level();

void log_message(LogLevel level, const std::string& message);

inline void log_debug(const std::string& m) { log_message(LogLevel::kDebug, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::kInfo, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::kWarn, m); }
inline void log_error(const std::string& m) { log_message(LogLevel::kError, m); }

}  // namespace clvboost
