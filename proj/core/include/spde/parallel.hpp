#pragma once

#include <cstddef>
#include <functional>

namespace spde {

/// Worker count: SPDE_THREADS when set to a positive integer, otherwise
/// std::thread::hardware_concurrency() (at least 1).
std::size_t default_worker_count();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Callers write
/// results into pre-assigned slots, so the outcome is independent of the
/// schedule. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace spde
