#pragma once

#include <cstddef>
#include <functional>

namespace gma3 {

// Process-wide cap on worker threads used by pointwise grid loops.
// Reductions (sums, quadrature) always run serially so that results do not
// depend on the thread count.
void set_max_threads(int n);
int max_threads();

// Runs body(begin, end) over a partition of [0, n).  Serial when the cap is
// one or the range is too small to be worth forking.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace gma3
