#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace heis {

/// Runs fn(i) for i in [0, n) on `workers` threads over disjoint index chunks.
/// Callers write to disjoint per-index slots, so results do not depend on the
/// worker count; reductions stay with the caller and run in index order.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  const std::size_t chunk = (n + nw - 1) / nw;
  for (std::size_t w = 0; w < nw; ++w) {
    const std::size_t i0 = w * chunk;
    const std::size_t i1 = std::min(n, i0 + chunk);
    if (i0 >= i1) break;
    pool.emplace_back([i0, i1, &fn] {
      for (std::size_t i = i0; i < i1; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace heis
