#pragma once

// Static-partition parallel loop. Callers write results into per-index slots
// and reduce serially, so output does not depend on the thread count.

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace frostlab {

// FROSTLAB_THREADS if set and positive, else hardware concurrency (>= 1).
int ThreadCount();

template <class Fn>
void ParallelFor(std::size_t n, Fn&& fn) {
  const std::size_t nt = std::min<std::size_t>(ThreadCount(), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += nt) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace frostlab
