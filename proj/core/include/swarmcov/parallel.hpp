#pragma once

#include <cstddef>
#include <functional>
#include <memory>

namespace swarmcov {

/// Runs index-parallel loops on a fixed number of worker threads.
/// Loop bodies must only write to slots owned by their index; results are then
/// independent of the thread count.
class Executor {
 public:
  /// threads <= 0 selects the available hardware parallelism.
  explicit Executor(int threads = 1);
  ~Executor();
  Executor(Executor&&) noexcept;
  Executor& operator=(Executor&&) noexcept;

  int threads() const { return threads_; }
  void for_each(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& body) const;

 private:
  struct Arena;
  int threads_;
  std::unique_ptr<Arena> arena_;
};

}  // namespace swarmcov
