#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace bjl {

/// Number of workers for `requested` (0 means hardware concurrency), never
/// more than the number of items.
inline unsigned resolve_threads(unsigned requested, std::size_t items) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (items < n) n = static_cast<unsigned>(std::max<std::size_t>(1, items));
  return n;
}

/// Calls body(i) for i in [0, n). Each index runs exactly once; the caller
/// owns result placement, so output order never depends on scheduling.
/// Exceptions are captured per index and the one with the lowest index is
/// rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const unsigned workers = resolve_threads(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace bjl
