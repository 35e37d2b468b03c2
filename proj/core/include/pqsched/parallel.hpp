#pragma once

#include <cstddef>
#include <functional>

namespace pqsched {

/// Worker count: PQSCHED_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Callers write
/// into slot i of a preallocated buffer and reduce in index order, so the
/// result never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace pqsched
