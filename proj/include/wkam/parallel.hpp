#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace wkam {

namespace detail {
inline std::atomic<int>& worker_override() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

// Forces a worker count process-wide; 0 restores the default.
inline void set_worker_override(int n) { detail::worker_override().store(std::max(0, n)); }

// Worker count from the override, TOOLKIT_THREADS, else hardware concurrency.
inline int worker_count() {
  if (const int o = detail::worker_override().load(); o >= 1) return o;
  if (const char* env = std::getenv("TOOLKIT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Static contiguous partition of [0, n); fn(lo, hi) must only write to its
// own range, so results do not depend on the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int workers = worker_count()) {
  const auto w = static_cast<std::size_t>(std::max(1, workers));
  if (w == 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t parts = std::min(w, n);
  std::vector<std::thread> pool;
  pool.reserve(parts - 1);
  for (std::size_t p = 1; p < parts; ++p)
    pool.emplace_back([&, p] { fn(n * p / parts, n * (p + 1) / parts); });
  fn(0, n / parts);
  for (auto& t : pool) t.join();
}

}  // namespace wkam
