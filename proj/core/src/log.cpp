#include "log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

namespace aligner::detail {

spdlog::logger& log() {
    static auto logger = [] {
        auto existing = spdlog::get("aligner");
        return existing ? existing : spdlog::stderr_color_mt("aligner");
    }();
    return *logger;
}

} // namespace aligner::detail
