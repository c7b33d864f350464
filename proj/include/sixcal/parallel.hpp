#pragma once

#include <cstddef>
#include <functional>

namespace sixcal {

// Worker count from SIXCAL_THREADS, else the hardware concurrency (>= 1).
int WorkerCount();

// Calls fn(i) for i in [0, n) on up to `workers` threads. Callers write
// results into slot i, so the outcome does not depend on scheduling.
// The first exception thrown by fn is rethrown after all workers join.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn, int workers = 0);

}  // namespace sixcal
