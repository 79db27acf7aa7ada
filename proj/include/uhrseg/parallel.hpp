#pragma once

// Deterministic work partitioning. Iterations are split into contiguous
// index ranges, so results are identical for every thread count provided
// each iteration writes only its own output slot.

#include <thread>
#include <vector>

#include "uhrseg/core.hpp"

namespace uhrseg {

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads < 1) throw std::invalid_argument("parallel_for: threads must be >= 1");
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(threads, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    const std::size_t lo = n * t / workers;
    const std::size_t hi = n * (t + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace uhrseg
