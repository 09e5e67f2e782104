#pragma once

#include <cstddef>
#include <functional>

namespace qforest {

/// Worker count from QFOREST_THREADS (defaults to 1, clamped to >= 1).
std::size_t threads_from_env();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; callers write results to per-index slots so the outcome is
/// independent of the worker count. The first exception thrown by any body is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace qforest
