#pragma once

#include <cstddef>
#include <functional>

namespace diffcodec {

// Worker count: hardware concurrency capped by DIFFCODEC_THREADS.
unsigned thread_count();

// Runs body(i) for i in [begin, end) on contiguous chunks. Each index is
// visited exactly once, so writes to slot i are deterministic.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace diffcodec
