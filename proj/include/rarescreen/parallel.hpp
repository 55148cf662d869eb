#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rarescreen {

// Runs fn(i) for i in [0, n) on up to n_threads workers. Tasks must be
// independent and write only to their own slot of a pre-sized output, so
// results do not depend on scheduling. The first exception wins and is
// rethrown on the caller thread.
template <class Fn>
void parallel_for(std::size_t n, unsigned n_threads, const Fn& fn) {
  if (n == 0) return;
  if (n_threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (n_threads > n) n_threads = static_cast<unsigned>(n);

  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (error || next >= n) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rarescreen
