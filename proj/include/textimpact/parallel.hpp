#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace textimpact {

// 0 means one worker per hardware thread.
inline unsigned resolve_workers(unsigned workers) {
  return workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
}

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index must
// write only its own output slot. If bodies throw, the exception of the
// lowest failing index is rethrown after all threads join.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace textimpact
