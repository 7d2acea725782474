#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace gffperc {

/// Runs fn(r) for r in [0, replicas) on `threads` workers with a static
/// contiguous partition. Each replica owns its RNG stream, so results do not
/// depend on the thread count. The first exception is rethrown.
template <class Fn>
void parallel_replicas(long replicas, int threads, Fn&& fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max(1L, replicas))));
  if (threads == 1) {
    for (long r = 0; r < replicas; ++r) fn(r, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      const long lo = replicas * w / threads, hi = replicas * (w + 1) / threads;
      try {
        for (long r = lo; r < hi; ++r) fn(r, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gffperc
