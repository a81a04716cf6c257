#pragma once

#include <iostream>
#include <string>
#include <string_view>

#include "bsce/error.hpp"

namespace bsce {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel& log_level() {
    static LogLevel level = LogLevel::Info;
    return level;
}

inline LogLevel parse_log_level(std::string_view name) {
    if (name == "error") return LogLevel::Error;
    if (name == "info") return LogLevel::Info;
    if (name == "debug") return LogLevel::Debug;
    throw ConfigError("BSCE_LOG_LEVEL must be one of error, info, debug");
}

inline void log_error(const std::string& msg) {
    std::cerr << "[error] " << msg << "\n";
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

}  // namespace bsce
