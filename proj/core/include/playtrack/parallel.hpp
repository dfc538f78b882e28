#pragma once

#include <cstddef>
#include <functional>

namespace playtrack {

/// Worker count from PLAYTRACK_WORKERS, falling back to the hardware concurrency.
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) on up to `workers` threads. The first exception thrown by any
/// call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = worker_count());

}  // namespace playtrack
