#ifndef ADRMTL_PARALLEL_UTIL_HPP
#define ADRMTL_PARALLEL_UTIL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace adrmtl::detail {

// Index-ordered parallel map over [0, count). Each call writes only its
// own slot, so results are independent of thread scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace adrmtl::detail

#endif  // ADRMTL_PARALLEL_UTIL_HPP
