#include "varlab/parallel.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace varlab {
namespace {

std::atomic<unsigned> g_threads{1};
constexpr std::size_t kChunk = 512;

}  // namespace

void set_thread_count(unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  g_threads.store(threads);
}

unsigned thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c * kChunk, std::min(n, (c + 1) * kChunk));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_chunk = chunks;
  std::exception_ptr error;

  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        body(c * kChunk, std::min(n, (c + 1) * kChunk));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (c < error_chunk) {
          error_chunk = c;
          error = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

MeanStderr mean_stderr(std::span<const double> values, std::span<const double> weights) {
  MeanStderr out;
  out.count = values.size();
  if (values.empty()) return out;
  const bool weighted = !weights.empty();
  const auto y = [&](std::size_t i) { return weighted ? weights[i] * values[i] : values[i]; };

  CompensatedSum sum;
  for (std::size_t i = 0; i < values.size(); ++i) sum.add(y(i));
  const double n = static_cast<double>(values.size());
  out.mean = sum.value() / n;
  if (values.size() < 2) return out;

  CompensatedSum sq;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dev = y(i) - out.mean;
    sq.add(dev * dev);
  }
  out.std_error = std::sqrt(sq.value() / (n - 1.0) / n);
  return out;
}

}  // namespace varlab
