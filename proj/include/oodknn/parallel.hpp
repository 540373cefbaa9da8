#pragma once

#include <cstddef>
#include <functional>

namespace oodknn {

/// Resolves a requested worker count; 0 means "all hardware threads".
unsigned resolve_workers(unsigned requested) noexcept;

/// Splits [0, n) into at most `workers` contiguous chunks and runs
/// `body(begin, end)` on each, one thread per chunk. The first exception (by
/// chunk order) is rethrown after all threads join.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace oodknn
