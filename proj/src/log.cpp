#include "wurook/log.hpp"

#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace wurook {

std::shared_ptr<spdlog::logger> logger() {
    static std::once_flag once;
    static std::shared_ptr<spdlog::logger> log;
    std::call_once(once, [] {
        log = spdlog::stderr_color_mt("wurook");
        log->set_level(spdlog::level::warn);
        log->set_pattern("[%l] %v");
    });
    return log;
}

} // namespace wurook
