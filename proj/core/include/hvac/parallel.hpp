#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hvac {

/// Fixed pool running index-parallel loops. Each index runs exactly once and
/// writes only its own output slot, so results do not depend on scheduling.
/// Loops started from inside a loop body, or while another thread holds the
/// pool, run inline on the calling thread.
class ThreadPool {
 public:
  /// threads == 0 picks hardware_concurrency. A pool of one runs loops inline.
  explicit ThreadPool(std::size_t threads = 0);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  std::size_t size() const { return workers_.size() + 1; }
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

  /// Process-wide pool sized from HVAC_THREADS or the hardware.
  static ThreadPool& shared();

 private:
  void worker_loop();
  void run_chunk();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* body_ = nullptr;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  std::size_t active_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace hvac
