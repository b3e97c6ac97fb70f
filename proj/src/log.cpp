#include "crossgp/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace crossgp {

namespace {

LogLevel levelFromEnv() {
    const char* env = std::getenv("CROSSGP_LOG");
    if (env == nullptr) return LogLevel::Info;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Info;
}

LogLevel g_level = levelFromEnv();

}  // namespace

LogLevel logLevel() { return g_level; }
void setLogLevel(LogLevel level) { g_level = level; }

void logError(const std::string& msg) {
    std::fprintf(stderr, "[crossgp] error: %s\n", msg.c_str());
}

void logInfo(const std::string& msg) {
    if (g_level >= LogLevel::Info) std::fprintf(stderr, "[crossgp] %s\n", msg.c_str());
}

void logDebug(const std::string& msg) {
    if (g_level >= LogLevel::Debug) std::fprintf(stderr, "[crossgp] debug: %s\n", msg.c_str());
}

}  // namespace crossgp
