#pragma once

#include <cstddef>
#include <functional>

namespace crosspath {

// Runs fn(i) for every i in [0, n) on up to `jobs` threads. Callers write
// results into per-index slots, so output never depends on scheduling. If
// any call throws, the exception from the lowest failing index is rethrown
// after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// `requested` when positive, else CROSSPATH_JOBS from the environment, else 1.
int resolve_jobs(int requested);

}  // namespace crosspath
