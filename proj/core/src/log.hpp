#pragma once

#include <spdlog/spdlog.h>

namespace aligner::detail {

// Library diagnostics go to stderr; stdout belongs to the caller's data.
spdlog::logger& log();

} // namespace aligner::detail
