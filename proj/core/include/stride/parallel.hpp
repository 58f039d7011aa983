#pragma once

#include <cstddef>
#include <functional>

namespace stride {

/// Worker count used by the parallel loops in this library. Defaults to 1.
/// Every parallel loop partitions work so that results do not depend on it.
int thread_count() noexcept;
void set_thread_count(int n);

/// Runs body(i) for i in [0, n), split into contiguous chunks over
/// thread_count() workers. Bodies must write disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace stride
