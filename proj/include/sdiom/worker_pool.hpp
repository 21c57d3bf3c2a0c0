#pragma once

// Deterministic fan-out for independent jobs: results land in a vector slot
// chosen by job index, so the outcome is byte-identical no matter how many
// workers run or how the scheduler interleaves them.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "sdiom/error.hpp"

namespace sdiom::util {

template <typename R>
std::vector<R> run_indexed(int count, int workers,
                           const std::function<R(int)>& job) {
  require(count >= 0, "bad-jobs", "job count must be nonnegative");
  require(workers >= 1, "bad-workers", "worker count must be at least 1");
  std::vector<R> results(count);
  if (count == 0) return results;
  if (workers == 1 || count == 1) {
    for (int i = 0; i < count; ++i) results[i] = job(i);
    return results;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  int spawn = std::min(workers, count);
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace sdiom::util
