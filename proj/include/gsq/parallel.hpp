#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gsq {

/// Runs body(i) for i in [0, n) on `workers` threads with static contiguous
/// chunks. Callers write per-index results and reduce them in index order,
/// so the output never depends on the worker count.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      const std::size_t lo = n * k / w, hi = n * (k + 1) / w;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gsq
