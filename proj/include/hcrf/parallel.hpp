#pragma once

#include <cstddef>
#include <functional>

namespace hcrf {

// Worker cap from HCRF_THREADS; unset, empty, malformed, or 0 means sequential.
int threads_from_env();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 or 1 runs
/// inline). Each index is processed exactly once, so callers writing to
/// per-index slots get results independent of the worker count. After all
/// workers finish, the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace hcrf
