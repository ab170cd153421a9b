#pragma once

#include <cstddef>
#include <functional>

namespace stokeslab {

/// Worker count used by row-parallel kernels. 1 is the reference mode.
void set_num_threads(int n);
int num_threads();

/// Runs fn(begin, end) over contiguous chunks of [0, count). Chunks are
/// disjoint, so kernels writing only to their own rows need no locking.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace stokeslab
