#pragma once

#include <functional>

namespace csynth::util {

/// Worker count: CONTRACT_SYNTH_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
int worker_count();

/// Runs f(0..n-1) on up to `threads` workers and waits for all of them. The
/// first exception thrown by any call is rethrown after the join.
void parallel_for(int n, const std::function<void(int)>& f, int threads = worker_count());

}  // namespace csynth::util
