#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace hhdr {

// Thread count resolution: explicit request > 0 wins, then HHDR_THREADS, then 1.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HHDR_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// Run fn(i) for i in [0, n). Each index computes an independent value, so the
// result is identical for any thread count or scheduling order.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  int m = std::min(threads, n);
  pool.reserve(m);
  for (int t = 0; t < m; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace hhdr
