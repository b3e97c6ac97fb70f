#pragma once

#include <string>

namespace crossgp {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Controlled by the CROSSGP_LOG environment variable: error | info | debug.
LogLevel logLevel();
void setLogLevel(LogLevel level);

void logError(const std::string& msg);
void logInfo(const std::string& msg);
void logDebug(const std::string& msg);

}  // namespace crossgp
