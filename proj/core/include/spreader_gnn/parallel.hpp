#pragma once

#include <cstddef>
#include <functional>

namespace spreader_gnn {

// Worker count from SPREADER_GNN_THREADS (default 1). Throws ConfigError if
// the variable is set but not a positive integer.
std::size_t worker_count();

// Calls fn(i) for every i in [0, n) on up to `workers` threads. fn must only
// write to per-index state; the first exception thrown is rethrown here.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace spreader_gnn
