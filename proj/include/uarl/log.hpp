#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace uarl::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Quiet = 3 };

// Verbosity comes from the UARL_LOG environment variable
// (debug|info|warn|quiet); default is warn.
inline Level threshold() {
    static const Level lvl = [] {
        const char* env = std::getenv("UARL_LOG");
        if (!env) return Level::Warn;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        if (std::strcmp(env, "quiet") == 0) return Level::Quiet;
        return Level::Warn;
    }();
    return lvl;
}

template <typename... Args>
inline void write(Level lvl, const char* tag, const char* fmt, Args... args) {
    if (lvl < threshold()) return;
    std::fprintf(stderr, "[%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

template <typename... Args>
inline void debug(const char* fmt, Args... args) {
    write(Level::Debug, "debug", fmt, args...);
}
template <typename... Args>
inline void info(const char* fmt, Args... args) {
    write(Level::Info, "info", fmt, args...);
}
template <typename... Args>
inline void warn(const char* fmt, Args... args) {
    write(Level::Warn, "warn", fmt, args...);
}

}  // namespace uarl::log
