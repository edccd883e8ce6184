#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace slidegraph {

inline unsigned default_worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Fixed set of threads that run index loops. Indices are handed out in
/// increasing order from a shared counter; parallel_for returns once every
/// index has finished (the barrier), rethrowing the first exception raised.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers) : size_(std::max(1u, workers)) {
    threads_.reserve(size_ - 1);
    for (unsigned t = 1; t < size_; ++t) threads_.emplace_back([this] { worker_loop(); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  unsigned size() const { return size_; }

  /// Calls fn(i, worker) for every i in [0, count). `worker` is in [0, size()).
  void parallel_for(std::size_t count, const std::function<void(std::size_t, unsigned)>& fn) {
    if (count == 0) return;
    if (size_ == 1) {
      for (std::size_t i = 0; i < count; ++i) fn(i, 0);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      job_ = &fn;
      count_ = count;
      next_.store(0);
      pending_ = size_;
      error_ = nullptr;
      ++generation_;
    }
    wake_.notify_all();
    run_indices(0);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (error_) std::rethrow_exception(std::exchange(error_, nullptr));
  }

 private:
  void worker_loop() {
    // Worker ids are fixed by construction order.
    unsigned id;
    {
      std::lock_guard lock(mutex_);
      id = next_id_++;
    }
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
        if (stopping_) return;
        seen = generation_;
      }
      run_indices(id);
    }
  }

  void run_indices(unsigned worker) {
    try {
      for (std::size_t i; (i = next_.fetch_add(1)) < count_;) (*job_)(i, worker);
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      next_.store(count_);  // stop handing out work
    }
    std::lock_guard lock(mutex_);
    if (--pending_ == 0) done_.notify_one();
  }

  unsigned size_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t, unsigned)>* job_ = nullptr;
  std::size_t count_ = 0;
  std::atomic<std::size_t> next_{0};
  unsigned pending_ = 0;
  unsigned next_id_ = 1;
  std::uint64_t generation_ = 0;
  bool stopping_ = false;
  std::exception_ptr error_;
};

}  // namespace slidegraph
