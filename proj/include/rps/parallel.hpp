#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rps {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

// Runs body(chunk_index, begin, end) over fixed-size chunks of [0, n_items).
// Chunk boundaries depend only on chunk_size, never on the worker count, so
// per-chunk (or per-item) outputs reduce to worker-count-independent results
// when combined in chunk order. The first exception thrown by any worker is
// rethrown after all workers stop.
template <typename Body>
void parallel_chunks(int64_t n_items, int64_t chunk_size, int workers, const Body& body) {
  const int64_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
  const int n_threads = int(std::min<int64_t>(resolve_workers(workers), n_chunks));
  if (n_threads <= 1) {
    for (int64_t c = 0; c < n_chunks; ++c)
      body(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
    return;
  }
  std::atomic<int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const int64_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) return;
      try {
        body(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n_chunks);  // stop handing out work
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(size_t(n_threads));
  for (int w = 0; w < n_threads; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Compensated (Neumaier) summation in a fixed order.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace rps
