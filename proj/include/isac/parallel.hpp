// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace isac {

inline unsigned default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Runs fn(i) for i in [0, n). Work items must write only to their own slots;
// output ordering is then independent of the thread schedule.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (n == 0) return;
  if (jobs == 0) jobs = default_jobs();
  if (jobs == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::thread> workers;
  unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  std::vector<std::exception_ptr> errors(count);
  for (unsigned t = 0; t < count; ++t) {
    workers.emplace_back([&, t] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failed.load()) {
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
}

}  // namespace isac
