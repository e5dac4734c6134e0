#pragma once

#include <cstddef>
#include <functional>

namespace mxm {

/// Worker count: MXM_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; the first exception thrown by any call is rethrown
/// after all workers have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn);

} // namespace mxm
