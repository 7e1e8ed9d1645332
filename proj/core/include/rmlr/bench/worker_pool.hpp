#pragma once

#include <cstddef>
#include <functional>

namespace rmlr::bench {

/// Runs task(i) for i in [0, count) on `threads` workers. Tasks must write
/// to disjoint outputs. The first exception thrown by any task is rethrown
/// after all workers have stopped.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace rmlr::bench
