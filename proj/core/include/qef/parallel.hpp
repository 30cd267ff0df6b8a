#pragma once

#include <cstddef>
#include <functional>

namespace qef {

// Worker count: hardware concurrency, capped by the QEF_THREADS environment
// variable when it holds a positive integer.
unsigned worker_count();

// Calls body(i) for i in [0, count) on up to worker_count() threads. Each index
// runs exactly once; callers write results into per-index slots and reduce
// afterwards in index order so sums do not depend on scheduling.
// The first exception thrown by a body is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace qef
