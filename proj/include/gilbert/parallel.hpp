#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gilbert {

/// Worker count: an explicit positive request wins, then the
/// GILBERT_THREADS environment variable, then the hardware concurrency.
int resolve_threads(int requested = 0);

/// Runs fn(chunk_index) for every chunk on up to `threads` workers and
/// returns the results indexed by chunk, so any reduction done in chunk
/// order is independent of the worker count. The first exception thrown by
/// a worker is rethrown here.
template <class Result, class Fn>
std::vector<Result> run_chunks(std::size_t n_chunks, int threads, Fn&& fn) {
  std::vector<Result> results(n_chunks);
  const auto workers = static_cast<std::size_t>(
      std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(n_chunks))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_chunks) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace gilbert
