#pragma once

#include <cstddef>
#include <functional>

namespace gcalc {

// Worker cap for slice-parallel loops. Defaults to the GCALC_THREADS
// environment variable (clamped to >= 1) or 1 when unset.
int max_threads();
void set_max_threads(int n);

// Runs fn(begin, end) over a partition of [0, n). Chunks write disjoint
// outputs, so results are independent of the partition and thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace gcalc
