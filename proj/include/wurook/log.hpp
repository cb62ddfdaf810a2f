// Library-wide logger (spdlog, stderr). Quiet by default: warnings only.
#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace wurook {

std::shared_ptr<spdlog::logger> logger();

} // namespace wurook
