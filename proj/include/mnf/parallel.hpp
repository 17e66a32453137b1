#pragma once

#include <cstddef>
#include <functional>

namespace mnf {

/// Worker count from MNF_WORKERS, falling back to the hardware concurrency.
/// Only affects wall time; all parallel loops are deterministic.
unsigned worker_count();

/// Run fn(i) for i in [0, n) on up to `workers` threads. Items are claimed
/// dynamically; callers must write results into per-item slots.
/// The first exception thrown by any item is rethrown after all threads join.
void parallel_for(std::size_t n, unsigned workers,
                  std::function<void(std::size_t)> const& fn);

}  // namespace mnf
