#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace mbrl {

/// Runs fn(i) for i in [0, n). Results must not depend on scheduling; give
/// each task its own derived RNG stream so thread count never changes
/// outputs.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int workers = int(std::min(size_t(threads), n));
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace mbrl
