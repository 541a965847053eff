#pragma once

#include <cstddef>
#include <functional>

namespace aligner {

// Number of workers used when a caller passes jobs == 0. Reads ALIGNER_JOBS,
// then falls back to std::thread::hardware_concurrency().
std::size_t default_jobs();

// Runs body(i) for every i in [0, count) on up to `jobs` threads. Work is
// split into contiguous static chunks, so any body that writes only to
// slot i produces identical results for every job count. The first
// exception thrown by a worker is rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body);

} // namespace aligner
