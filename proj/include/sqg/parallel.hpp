#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sqg {

/// Worker-pool width handed down from the CLI. Modules never spawn more
/// threads than this.
struct ParallelContext {
  unsigned width = 1;

  static ParallelContext machine() {
    return {std::max(1u, std::thread::hardware_concurrency())};
  }
};

/// Runs fn(begin, end, chunk) over contiguous chunks of [0, n). Chunks are
/// disjoint, so workers that write only to their own range need no locking.
/// The first exception thrown by any chunk is rethrown on the caller.
template <class Fn>
void parallel_for(const ParallelContext& ctx, std::size_t n, Fn&& fn) {
  const std::size_t width = std::max<std::size_t>(1, std::min<std::size_t>(ctx.width, n));
  if (width <= 1) {
    if (n > 0) fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(width);
  {
    std::vector<std::jthread> workers;
    workers.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t begin = n * c / width;
      const std::size_t end = n * (c + 1) / width;
      workers.emplace_back([&, begin, end, c] {
        try {
          fn(begin, end, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sqg
