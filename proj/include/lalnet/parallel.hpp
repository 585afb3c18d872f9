#pragma once

#include <cstdint>
#include <functional>

namespace lalnet {

/// Worker count: LALNET_THREADS if set to a positive integer, else hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Results must be written to
/// per-index slots; the first exception thrown (lowest index) is rethrown after all workers join.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace lalnet
