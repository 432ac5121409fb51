// Deterministic parallel execution over trial ranges.
//
// Work is cut into fixed-size blocks that depend only on the item count, so
// per-block reductions merge in block order and the output is identical for
// any thread count, including 1.

#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace prlmc {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::int64_t block_size_for(std::int64_t n_items) {
  const std::int64_t blocks_wanted = 64;
  std::int64_t size = (n_items + blocks_wanted - 1) / blocks_wanted;
  if (size < 1) size = 1;
  if (size > 65536) size = 65536;
  return size;
}

// Calls fn(block_index, begin, end) for every block; blocks may run on any
// thread.  fn must only touch state owned by its block index.
inline void parallel_blocks(std::int64_t n_items, int threads,
                            const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
  if (n_items <= 0) return;
  const std::int64_t block = block_size_for(n_items);
  const std::int64_t n_blocks = (n_items + block - 1) / block;
  threads = resolve_threads(threads);
  if (threads > n_blocks) threads = static_cast<int>(n_blocks);

  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&]() {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      const std::int64_t begin = b * block;
      const std::int64_t end = std::min(n_items, begin + block);
      try {
        fn(b, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

inline std::int64_t n_blocks_for(std::int64_t n_items) {
  const std::int64_t block = block_size_for(n_items);
  return n_items <= 0 ? 0 : (n_items + block - 1) / block;
}

}  // namespace prlmc
