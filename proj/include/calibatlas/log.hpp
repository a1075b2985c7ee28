// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_LOG_HPP_
#define CALIBATLAS_LOG_HPP_

#include <string>

namespace calibatlas {

// Minimal stderr logger. Level comes from the CALIB_ATLAS_LOG environment
// variable ("error", "warn", "info", "debug"); default is "warn". This is the
// only environment-variable configuration in the library.
enum class LogLevel : int { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level();
void log_message(LogLevel level, const std::string& message);

inline void log_warn(const std::string& m) { log_message(LogLevel::kWarn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::kInfo, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::kDebug, m); }

}  // namespace calibatlas

#endif  // CALIBATLAS_LOG_HPP_
