#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace mdl {

// Splits [begin, end) into fixed chunks of size `grain`. Chunks are handed
// out dynamically, but each result lands in its own slot and the slots are
// folded left to right, so the outcome never depends on `threads`.
template <class R, class ChunkFn, class Combine>
R parallel_reduce(std::uint64_t begin, std::uint64_t end, std::uint64_t grain,
                  unsigned threads, R init, ChunkFn chunk_fn, Combine combine) {
  if (end <= begin) return init;
  if (grain == 0) grain = 1;
  const std::uint64_t n_chunks = (end - begin + grain - 1) / grain;
  std::vector<R> slots(n_chunks);
  std::vector<std::exception_ptr> errors(n_chunks);
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) return;
      const std::uint64_t b = begin + c * grain;
      const std::uint64_t e = std::min(end, b + grain);
      try {
        slots[c] = chunk_fn(b, e);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };

  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_chunks)));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  R acc = std::move(init);
  for (auto& s : slots) acc = combine(std::move(acc), std::move(s));
  return acc;
}

template <class Fn>
void parallel_for(std::uint64_t begin, std::uint64_t end, std::uint64_t grain, unsigned threads,
                  Fn fn) {
  struct Unit {};
  parallel_reduce<Unit>(
      begin, end, grain, threads, Unit{},
      [&](std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t i = b; i < e; ++i) fn(i);
        return Unit{};
      },
      [](Unit a, Unit) { return a; });
}

inline unsigned default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

}  // namespace mdl
