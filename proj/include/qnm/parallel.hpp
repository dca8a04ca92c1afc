#pragma once

#include <cstddef>
#include <functional>

namespace qnm {

/// Worker count: QNM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write results into preallocated slots so the outcome is independent of
/// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qnm
