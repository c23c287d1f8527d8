#include "swarmcov/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <thread>

namespace swarmcov {

struct Executor::Arena {
  // Lifts the default worker limit (hardware concurrency) so an explicit count is honoured.
  tbb::global_control limit;
  tbb::task_arena arena;
  explicit Arena(int n)
      : limit(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(n)), arena(n) {}
};

Executor::Executor(int threads) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads_ = threads;
  if (threads_ > 1) arena_ = std::make_unique<Arena>(threads_);
}

Executor::~Executor() = default;
Executor::Executor(Executor&&) noexcept = default;
Executor& Executor::operator=(Executor&&) noexcept = default;

void Executor::for_each(std::size_t n,
                        const std::function<void(std::size_t, std::size_t)>& body) const {
  if (n == 0) return;
  if (!arena_) {
    body(0, n);
    return;
  }
  const std::size_t grain = std::max<std::size_t>(64, n / (8 * static_cast<std::size_t>(threads_)));
  arena_->arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, grain),
                      [&](const tbb::blocked_range<std::size_t>& r) { body(r.begin(), r.end()); });
  });
}

}  // namespace swarmcov
