#pragma once

#include <cstdint>
#include <functional>

namespace callosim {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed dynamically; callers must make fn's effect independent of which
/// thread runs it. Exceptions are rethrown on the calling thread.
void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& fn);

/// Worker count from CCPATH_WORKERS, else hardware concurrency.
int default_workers();

}  // namespace callosim
