#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace gnull {

inline unsigned effective_threads(unsigned requested) {
  if (requested != 0) {
    return requested;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs worker(begin, end) over contiguous chunks of [0, n), one chunk per
// worker. Results must be written to per-index storage: the chunking is a
// throughput device only and must never affect what gets computed.
inline void parallel_chunks(
    std::size_t n, unsigned threads,
    const std::function<void(std::size_t, std::size_t)>& worker) {
  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min<std::size_t>(effective_threads(threads), n));
  if (n == 0) {
    return;
  }
  if (n_workers == 1) {
    worker(0, n);
    return;
  }
  const std::size_t base = n / n_workers;
  const std::size_t extra = n % n_workers;
  std::vector<std::exception_ptr> errors(n_workers);
  std::vector<std::thread> pool;
  pool.reserve(n_workers - 1);
  std::size_t begin = 0;
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t size = base + (w < extra ? 1 : 0);
    const std::size_t end = begin + size;
    auto run = [&worker, &errors, w, begin, end] {
      try {
        worker(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (w + 1 == n_workers) {
      run();  // last chunk on the calling thread
    } else {
      pool.emplace_back(run);
    }
    begin = end;
  }
  for (auto& t : pool) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace gnull
