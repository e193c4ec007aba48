#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pivotality {

/// Worker count for replicate loops. Results never depend on it: every
/// replicate draws from its own counter-derived stream and writes to its own
/// slot, and reductions run over the slots in index order.
struct ExecutionPolicy {
  unsigned workers = 1;
};

/// Evaluates fn(i) for i in [0,n) and returns the results in index order.
template <class T, class Fn>
std::vector<T> run_replicates(std::size_t n, const ExecutionPolicy& policy, Fn&& fn) {
  std::vector<T> out(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(policy.workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace pivotality
