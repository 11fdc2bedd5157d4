#ifndef PANELBREAK_PARALLEL_HPP
#define PANELBREAK_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace panelbreak {

// Index-sharded parallel loop. Each index is handled exactly once and all
// randomness must come from per-index substreams, so the result is the same
// for any worker count.
inline void parallel_for(std::size_t total, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || total < 2) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  auto nw = static_cast<std::size_t>(threads);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < total; i += nw) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace panelbreak

#endif
