#pragma once

#include <cstddef>
#include <functional>

namespace pension {

/// Worker count: PENSION_ENGINE_THREADS caps std::thread::hardware_concurrency().
unsigned worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// threads. Chunking depends only on n and threads, never on timing.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace pension
