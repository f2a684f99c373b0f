#pragma once

#include <functional>

namespace casimir {

// Worker count used by parallel_for when none is given. Defaults to the
// hardware concurrency; values < 1 reset to that default.
void set_default_threads(int n);
int default_threads();

// Runs body(i) for i in [0, n) on up to `threads` workers. Indices are split
// into contiguous chunks, so results written per index are deterministic.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& body, int threads = 0);

}  // namespace casimir
