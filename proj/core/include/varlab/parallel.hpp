#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace varlab {

/// Worker count used by every parallel loop in the library. 0 selects the
/// hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(begin, end) over [0, n) split in fixed-size chunks. The chunk
/// layout depends only on n, so per-index results never depend on the worker
/// count. The first exception (by chunk order) is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// Sample mean and standard error of the mean.
struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Mean / standard error of values (in index order). With weights, the
/// estimate is the mean of w_i * x_i (importance-weighted expectation).
MeanStderr mean_stderr(std::span<const double> values,
                       std::span<const double> weights = {});

}  // namespace varlab
