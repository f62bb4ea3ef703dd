#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace padic {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

// 0 means "consult PADIC_THREADS, else 1".
inline void set_thread_count(int n) { detail::thread_setting().store(std::max(0, n)); }

inline int thread_count() {
  int n = detail::thread_setting().load();
  if (n > 0) return n;
  if (const char* env = std::getenv("PADIC_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  return 1;
}

// Runs body(begin, end) over fixed-size chunks of [0, n).  Chunk boundaries
// depend only on n, never on the thread count.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t chunk, Body&& body) {
  if (n == 0) return;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(thread_count(), chunks));
  auto run = [&](std::size_t w) {
    for (std::size_t c = w; c < chunks; c += workers) {
      body(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
  };
  if (workers <= 1) {
    run(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
}

inline constexpr std::size_t kReduceChunk = 1024;

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  parallel_chunks(n, kReduceChunk, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

// Sum of term(i) for i in [0, n).  Each chunk is summed left to right, then
// the chunk partials are combined by a fixed pairwise tree, so the result is
// bit-identical for any thread count.
template <class T, class Term>
T deterministic_sum(std::size_t n, Term&& term, T zero = T{}) {
  if (n == 0) return zero;
  const std::size_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<T> partial(chunks, zero);
  parallel_chunks(n, kReduceChunk, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    T acc = zero;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = std::move(acc);
  });
  for (std::size_t width = 1; width < chunks; width *= 2) {
    for (std::size_t i = 0; i + width < chunks; i += 2 * width) partial[i] += partial[i + width];
  }
  return partial[0];
}

}  // namespace padic
