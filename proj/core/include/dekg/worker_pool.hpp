#pragma once

#include <cstddef>
#include <functional>

namespace dekg {

// 0 means "use the available hardware threads".
std::size_t resolve_workers(std::size_t requested);

// Runs fn(0..n-1) across up to `workers` threads. Indices are handed out
// atomically; callers that write results into index i of a pre-sized buffer
// get a deterministic outcome regardless of scheduling. The first exception
// thrown by any worker is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace dekg
