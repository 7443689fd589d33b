#pragma once

#include <cstddef>
#include <functional>

namespace cgc {

/// Worker count: hardware concurrency, capped by the CGC_THREADS environment variable.
unsigned worker_count();

/// Run body(k) for k in [0, n) on up to worker_count() threads, in contiguous chunks.
/// The first exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cgc
