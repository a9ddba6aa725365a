#pragma once

#include <cstddef>
#include <functional>

namespace ergo {

// Worker count from ERGO_THREADS (default: hardware concurrency, at least 1).
int worker_count();

// Runs fn(i) for i in [0, n). Tasks must write to disjoint slots; callers
// reduce the slots in index order so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ergo
