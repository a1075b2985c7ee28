// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace calibatlas {

static LogLevel parse_level() {
  const char* env = std::getenv("CALIB_ATLAS_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  if (std::strcmp(env, "error") == 0) return LogLevel::kError;
  if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
  if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
  if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
  return LogLevel::kWarn;
}

LogLevel log_level() {
  static LogLevel level = parse_level();
  return level;
}

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[calib-atlas %s] %s\n", names[static_cast<int>(level)],
               message.c_str());
}

}  // namespace calibatlas
