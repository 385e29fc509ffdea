#include "necst/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace necst {
namespace {

std::atomic<unsigned> g_thread_count{0};  // 0 = not yet initialized

unsigned default_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Lazily started pool. Workers sleep until a job is posted and pull chunks
// from a shared cursor; chunk boundaries are fixed up front, so outputs do
// not depend on which worker runs which chunk. The pool never shrinks —
// surplus workers wake, find no chunk and go back to sleep.
class Pool {
 public:
  static Pool& instance() {
    static Pool pool;
    return pool;
  }

  void run(std::size_t n, unsigned threads,
           const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
      fn(0, n);
      return;
    }
    ensure_workers(threads - 1);

    std::size_t chunk = (n + threads - 1) / threads;
    {
      std::unique_lock lock(mutex_);
      job_fn_ = &fn;
      job_n_ = n;
      job_chunk_ = chunk;
      job_next_ = chunk;  // chunk 0 belongs to the caller
      job_pending_ = static_cast<unsigned>(workers_.size());
      ++job_id_;
    }
    cv_.notify_all();

    fn(0, std::min(chunk, n));

    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [&] { return job_pending_ == 0; });
    job_fn_ = nullptr;
  }

 private:
  Pool() = default;

  void ensure_workers(unsigned needed) {
    std::unique_lock lock(mutex_);
    while (workers_.size() < needed) {
      workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
    }
  }

  void worker_loop(std::stop_token st) {
    std::uint64_t seen = 0;
    for (;;) {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, st, [&] { return job_id_ != seen && job_fn_ != nullptr; });
      if (st.stop_requested()) return;
      seen = job_id_;
      const auto* fn = job_fn_;
      for (;;) {
        std::size_t begin = job_next_;
        if (begin >= job_n_) break;
        std::size_t end = std::min(begin + job_chunk_, job_n_);
        job_next_ = end;
        lock.unlock();
        (*fn)(begin, end);
        lock.lock();
      }
      if (--job_pending_ == 0) done_cv_.notify_all();
    }
  }

  std::mutex mutex_;
  std::condition_variable_any cv_;
  std::condition_variable done_cv_;
  std::vector<std::jthread> workers_;

  const std::function<void(std::size_t, std::size_t)>* job_fn_ = nullptr;
  std::size_t job_n_ = 0;
  std::size_t job_chunk_ = 0;
  std::size_t job_next_ = 0;
  unsigned job_pending_ = 0;
  std::uint64_t job_id_ = 0;
};

}  // namespace

void set_thread_count(unsigned n) { g_thread_count.store(n == 0 ? 1 : n); }

unsigned thread_count() {
  unsigned n = g_thread_count.load();
  if (n == 0) {
    n = default_threads();
    g_thread_count.store(n);
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  Pool::instance().run(n, thread_count(), fn);
}

ThreadCountGuard::ThreadCountGuard(unsigned n) : saved_(thread_count()) { set_thread_count(n); }
ThreadCountGuard::~ThreadCountGuard() { set_thread_count(saved_); }

}  // namespace necst
