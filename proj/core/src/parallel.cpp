#include "hvac/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace hvac {

namespace {
// Set while a thread executes loop bodies; nested loops then run inline.
thread_local bool in_loop = false;
}  // namespace

ThreadPool::ThreadPool(std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t i = 1; i < threads; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : workers_) t.join();
}

ThreadPool& ThreadPool::shared() {
  static ThreadPool pool([] {
    if (const char* env = std::getenv("HVAC_THREADS")) {
      try {
        return static_cast<std::size_t>(std::max(1, std::stoi(env)));
      } catch (...) {
      }
    }
    return std::size_t{0};
  }());
  return pool;
}

void ThreadPool::run_chunk() {
  const bool outer = in_loop;
  in_loop = true;
  for (;;) {
    std::size_t i;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (next_ >= count_) {
        in_loop = outer;
        return;
      }
      i = next_++;
    }
    try {
      (*body_)(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
}

void ThreadPool::worker_loop() {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      ++active_;
    }
    run_chunk();
    {
      std::lock_guard<std::mutex> lock(mutex_);
      --active_;
    }
    done_.notify_all();
  }
}

void ThreadPool::parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  auto inline_loop = [&] {
    for (std::size_t i = 0; i < count; ++i) body(i);
  };
  if (workers_.empty() || count == 1 || in_loop) return inline_loop();
  {
    std::unique_lock<std::mutex> lock(mutex_);
    if (body_ != nullptr) {
      // Another thread owns the pool right now.
      lock.unlock();
      return inline_loop();
    }
    body_ = &body;
    count_ = count;
    next_ = 0;
    error_ = nullptr;
    ++generation_;
  }
  wake_.notify_all();
  run_chunk();
  std::exception_ptr err;
  {
    std::unique_lock<std::mutex> lock(mutex_);
    done_.wait(lock, [&] { return next_ >= count_ && active_ == 0; });
    body_ = nullptr;
    err = error_;
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace hvac
