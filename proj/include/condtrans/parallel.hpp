#pragma once

#include <cstddef>
#include <functional>

namespace condtrans {

// Worker count used by parallel_for: hardware concurrency, capped by the
// CONDTRANS_THREADS environment variable (read once per process).
int worker_count();

// Runs body(begin, end) over a partition of [0, n) on up to worker_count()
// threads. Chunks are contiguous and disjoint, so per-element results are
// identical for any worker count; callers must only write to disjoint slots.
void parallel_for(std::ptrdiff_t n,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body);

}  // namespace condtrans
