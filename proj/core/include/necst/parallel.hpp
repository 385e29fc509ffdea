#pragma once

#include <cstddef>
#include <functional>

namespace necst {

// Worker-pool size used by parallel_for. Defaults to the hardware
// concurrency; a value of 1 runs everything on the calling thread.
void set_thread_count(unsigned n);
unsigned thread_count();

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each.
// Every index is written by exactly one chunk, so results do not depend
// on the number of worker threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// RAII override of the pool size, restores the previous value on exit.
class ThreadCountGuard {
 public:
  explicit ThreadCountGuard(unsigned n);
  ~ThreadCountGuard();
  ThreadCountGuard(const ThreadCountGuard&) = delete;
  ThreadCountGuard& operator=(const ThreadCountGuard&) = delete;

 private:
  unsigned saved_;
};

}  // namespace necst
