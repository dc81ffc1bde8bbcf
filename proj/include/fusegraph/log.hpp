#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace fusegraph::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Log level from HYBRID_INDEX_LOG (error|warn|info|debug), default warn.
inline Level level() {
    static Level lvl = [] {
        const char* env = std::getenv("HYBRID_INDEX_LOG");
        if (!env) return Level::kWarn;
        if (std::strcmp(env, "error") == 0) return Level::kError;
        if (std::strcmp(env, "info") == 0) return Level::kInfo;
        if (std::strcmp(env, "debug") == 0) return Level::kDebug;
        return Level::kWarn;
    }();
    return lvl;
}

template <typename... Args>
void emit(Level lvl, const char* tag, const char* fmt, Args... args) {
    if (lvl > level()) return;
    std::fprintf(stderr, "[%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

template <typename... Args>
void error(const char* fmt, Args... args) {
    emit(Level::kError, "error", fmt, args...);
}
template <typename... Args>
void warn(const char* fmt, Args... args) {
    emit(Level::kWarn, "warn", fmt, args...);
}
template <typename... Args>
void info(const char* fmt, Args... args) {
    emit(Level::kInfo, "info", fmt, args...);
}
template <typename... Args>
void debug(const char* fmt, Args... args) {
    emit(Level::kDebug, "debug", fmt, args...);
}

} // namespace fusegraph::log
