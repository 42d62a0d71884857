#include "clvboost/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace clvboost {

namespace {

LogLevel parse_level() {
  const char* env = std::getenv("CLVBOOST_LOG");
  if (!env) return LogLevel::kWarn;
  const std::string v(env);
  if (v == "debug") return LogLevel::kDebug;
  if (v == "info") return LogLevel::kInfo;
  if (v == "warn") return LogLevel::kWarn;
  if (v == "error") return LogLevel::kError;
  if (v == "off") return LogLevel::kOff;
  return LogLevel::kWarn;
}

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kError: return "error";
    case LogLevel::kOff: return "off";
  }
  return "?";
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_message(LogLevel level, const std::string& message) {
  if (level < log_level() || log_level() == LogLevel::kOff) return;
  std::fprintf(stderr, "[clvboost %s] %s\n", level_name(level),
               message.c_str());
}

}  // namespace clvboost
