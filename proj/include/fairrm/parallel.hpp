#pragma once

#include <functional>

namespace fairrm {

// threads <= 0 resolves to FAIRRM_THREADS or, failing that, the hardware
// concurrency.
int resolve_threads(int requested);

// Runs fn(0..count-1), fanning out across worker threads. Exceptions from
// workers are rethrown on the calling thread. Results must be written to
// per-index slots so output stays independent of the thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace fairrm
