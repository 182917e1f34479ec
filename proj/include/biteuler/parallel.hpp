#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace biteuler {

/// Number of Monte Carlo batches used for batch-means standard errors.
inline constexpr std::int64_t kBatchCount = 10;

/// Resolves a requested worker count; 0 means all hardware threads.
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

/// Half-open path range [begin, end) of batch b when M paths are split into
/// `batches` contiguous blocks.
struct BatchRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

inline BatchRange batch_range(std::int64_t M, std::int64_t batches, std::int64_t b) {
  return {b * M / batches, (b + 1) * M / batches};
}

/// Splits M paths into min(kBatchCount, M) batches and evaluates
/// fn(begin, end, batch) for each on up to `threads` workers. The batch layout
/// does not depend on the worker count and each batch is processed sequentially
/// in path order, so results are bit-identical for any number of threads.
template <class Result, class Fn>
std::vector<Result> run_batches(std::int64_t M, unsigned threads, Fn&& fn) {
  if (M < 1) throw std::invalid_argument("run_batches: M must be positive");
  const std::int64_t batches = std::min(kBatchCount, M);
  std::vector<Result> results(static_cast<std::size_t>(batches));
  const unsigned workers = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(batches));

  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= batches) return;
      try {
        const BatchRange range = batch_range(M, batches, b);
        results[static_cast<std::size_t>(b)] = fn(range.begin, range.end, b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = batches;
        return;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

/// Mean and batch-means standard error of per-batch estimates.
struct BatchStats {
  double mean = 0.0;
  double std_error = 0.0;
};

inline BatchStats batch_stats(const std::vector<double>& estimates) {
  BatchStats out;
  const auto n = static_cast<double>(estimates.size());
  if (estimates.empty()) return out;
  double sum = 0.0;
  for (double e : estimates) sum += e;
  out.mean = sum / n;
  if (estimates.size() < 2) return out;
  double ss = 0.0;
  for (double e : estimates) ss += (e - out.mean) * (e - out.mean);
  out.std_error = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

}  // namespace biteuler
