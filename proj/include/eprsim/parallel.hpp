#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cstdint>
#include <thread>
#include <vector>

namespace eprsim {

// Deterministic fan-out: the index range is split into a fixed number of
// chunks independent of the thread count, each chunk produces a partial
// result, and partials are reduced in chunk order. Results are therefore
// bit-identical across machines and thread counts.
template <typename Partial, typename Body, typename Reduce>
Partial parallel_chunked(std::uint64_t n, Partial init, Body&& body, Reduce&& reduce) {
  if (n == 0) return init;
  const std::uint64_t n_chunks = std::min<std::uint64_t>(n, 256);
  std::vector<Partial> partials(n_chunks, init);
  unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, 16);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const std::uint64_t c = next.fetch_add(1);
        if (c >= n_chunks || failed.load(std::memory_order_relaxed)) return;
        const std::uint64_t lo = c * n / n_chunks, hi = (c + 1) * n / n_chunks;
        Partial acc = init;
        for (std::uint64_t i = lo; i < hi; ++i) body(i, acc);
        partials[c] = acc;
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  Partial total = init;
  for (const Partial& p : partials) reduce(total, p);
  return total;
}

}  // namespace eprsim
