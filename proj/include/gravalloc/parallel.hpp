#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace gravalloc {

inline int default_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Chunked dynamic schedule; f(i) must only write disjoint state.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f, std::size_t chunk = 64) {
  if (threads <= 1 || n < chunk) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i0 = next.fetch_add(chunk);
        if (i0 >= n) break;
        for (std::size_t i = i0; i < std::min(n, i0 + chunk); ++i) f(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace gravalloc
