#pragma once

#include <cstddef>
#include <functional>

namespace lrvec {

/// Number of worker threads to use when the caller passes 0.
std::size_t default_thread_count();

/// Calls `body(i)` for every i in [0, count) using up to `threads` workers.
/// Indices are handed out in fixed-size chunks; the caller writes results into
/// index-addressed storage so the outcome never depends on scheduling. The first
/// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace lrvec
