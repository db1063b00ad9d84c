#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace abmix::parallel {

/// Process-wide worker cap (CLI --threads / ABMIX_THREADS). 0 = hardware count.
inline std::atomic<int>& max_threads_slot() {
  static std::atomic<int> v{0};
  return v;
}

inline void set_max_threads(int n) { max_threads_slot().store(n); }

inline int effective_threads(std::size_t items) {
  int cap = max_threads_slot().load();
  if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap <= 0) cap = 1;
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cap), items));
}

/// Static block partition of [0, n); `fn(i)` must be independent across i.
/// Deterministic outputs regardless of scheduling as long as each item only
/// writes its own slots.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = effective_threads(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace abmix::parallel
