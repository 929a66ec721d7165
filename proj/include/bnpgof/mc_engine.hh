// Apache License, Version 2.0, refer to LICENSE.txt

// Replicate scheduling with per-replicate streams, empirical distribution
// helpers and the chi-squared reference law.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bnpgof/error.hh"
#include "bnpgof/rng.hh"

namespace bnpgof {

class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> sorted() const { return sorted_; }

  double mean() const;
  // Unbiased (n - 1) sample variance.
  double variance() const;

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
};

// #{v <= c} / N.
double empirical_probability(const EmpiricalSample& sample, double c);

// Two-sided Kolmogorov-Smirnov distance sup |ECDF - F|, using the left
// limit of F at each sample point so atoms of F are handled.
double ks_distance(const EmpiricalSample& sample,
                   const std::function<double(double)>& cdf);

double chi_squared_cdf(double x, double dof);
double chi_squared_quantile(double u, double dof);

// Replicate i runs task(i, stream) with stream = RngStream(seed, {i}).
// Results are stored by index, so the output does not depend on the number
// of workers. A failure is rethrown as ReplicateError naming the lowest
// failing index.
template <class T>
std::vector<T> run_replicates(std::size_t count, std::uint64_t seed, unsigned workers,
                              const std::function<T(std::size_t, RngStream&)>& task) {
  std::vector<T> results(count);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = count;
  std::string failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        RngStream stream(seed, {static_cast<std::uint64_t>(i)});
        results[i] = task(i, stream);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = e.what();
        }
      }
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed_index < count) throw ReplicateError(failed_index, failure);
  return results;
}

inline EmpiricalSample run_replicates(
    std::size_t count, std::uint64_t seed, unsigned workers,
    const std::function<double(std::size_t, RngStream&)>& task) {
  return EmpiricalSample(run_replicates<double>(count, seed, workers, task));
}

}  // namespace bnpgof
