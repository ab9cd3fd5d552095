#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <string>

namespace coneshap {

enum class LogLevel : int { error = 0, warn = 1, info = 2, debug = 3 };

namespace detail {

inline LogLevel parse_log_level(const char* s) {
    if (s == nullptr) return LogLevel::warn;
    if (std::strcmp(s, "error") == 0) return LogLevel::error;
    if (std::strcmp(s, "warn") == 0) return LogLevel::warn;
    if (std::strcmp(s, "info") == 0) return LogLevel::info;
    if (std::strcmp(s, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
}

inline LogLevel& log_level_ref() {
    // CONE_SHAP_LOG controls verbosity: error|warn|info|debug (default warn).
    static LogLevel level = parse_log_level(std::getenv("CONE_SHAP_LOG"));
    return level;
}

inline std::mutex& log_mutex() {
    static std::mutex mu;
    return mu;
}

inline void log_line(LogLevel lvl, const char* tag, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level_ref())) return;
    std::lock_guard<std::mutex> lock(log_mutex());
    std::fprintf(stderr, "[coneshap %s] %s\n", tag, msg.c_str());
}

} // namespace detail

inline void set_log_level(LogLevel lvl) { detail::log_level_ref() = lvl; }

inline void log_error(const std::string& msg) { detail::log_line(LogLevel::error, "error", msg); }
inline void log_warn(const std::string& msg) { detail::log_line(LogLevel::warn, "warn", msg); }
inline void log_info(const std::string& msg) { detail::log_line(LogLevel::info, "info", msg); }
inline void log_debug(const std::string& msg) { detail::log_line(LogLevel::debug, "debug", msg); }

} // namespace coneshap
