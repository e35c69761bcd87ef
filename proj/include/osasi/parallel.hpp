#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace osasi {

/// Run fn(i) for i in [0, count) on up to n_threads threads (0 = hardware
/// concurrency). Each index must write only its own output slot; the first
/// exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn,
                         int n_threads = 0) {
  if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  if (count <= 0) return;
  if (n_threads == 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::int64_t i = t; i < count; i += n_threads) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace osasi
