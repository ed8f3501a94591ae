#pragma once

#include <cstddef>
#include <functional>

namespace nbnlkit {

/// Number of worker threads: NBNLKIT_THREADS if set (min 1), else the
/// hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n). Work is split into fixed-size chunks handed
/// out to workers; chunking does not depend on the thread count, so any
/// index-addressed output is identical no matter how many workers run.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nbnlkit
