#ifndef TSBREAK_PARALLEL_HPP
#define TSBREAK_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tsbreak::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested == 0) {
    return std::max(1u, std::thread::hardware_concurrency());
  }
  return requested;
}

/// Calls fn(i) for i in [0, count), split into contiguous chunks over at most
/// `threads` workers. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(long count, unsigned threads, Fn&& fn) {
  const long workers = std::min<long>(resolve_threads(threads), count);
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w) {
    const long begin = count * w / workers;
    const long end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (long i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tsbreak::detail

#endif  // TSBREAK_PARALLEL_HPP
