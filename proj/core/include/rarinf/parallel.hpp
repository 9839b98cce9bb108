#pragma once

#include <cstddef>
#include <functional>

namespace rarinf {

// Worker count for `requested`; values <= 0 mean one per hardware thread.
int resolve_threads(int requested);

// Calls f(i) for every i in [0, count) on up to `threads` workers. Indices are
// handed out in contiguous chunks, so results written to slot i are the same
// for any worker count. The first exception thrown by f is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& f);

}  // namespace rarinf
