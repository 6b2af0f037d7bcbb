#pragma once

#include <cstddef>
#include <functional>

namespace aigikit {

int default_workers();

/// Runs fn(0..n-1) across `workers` threads (0 = hardware concurrency).
/// Callers index into pre-sized outputs, so results are deterministic under
/// any schedule. The first exception thrown is rethrown after joining.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace aigikit
