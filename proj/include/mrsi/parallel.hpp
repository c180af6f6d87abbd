#pragma once

#include <cstddef>
#include <functional>

namespace mrsi {

/// Worker threads used by parallel_for; 0 means hardware concurrency.
void set_worker_count(unsigned n) noexcept;
unsigned worker_count() noexcept;

/// Calls fn(i) for every i in [0, n), split into contiguous static chunks.
/// Each index is processed exactly once; callers write disjoint outputs, so
/// results do not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mrsi
