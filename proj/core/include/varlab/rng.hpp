#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace varlab {

/// Philox4x32-10 counter-based generator. Each (key, stream, path) triple
/// addresses an independent sequence, so any path can be regenerated without
/// touching the others.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);

  Philox4x32(std::uint64_t seed, std::uint64_t path, std::uint32_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  Key key_;
  Counter counter_;
  Counter buffer_{};
  int index_ = 4;
};

/// Stream tags. Distinct purposes within one path draw from disjoint streams.
enum class Stream : std::uint32_t {
  kIncrements = 1,
  kInitial = 2,
  kAuxiliary = 3,
  kHidden = 4,
};

/// Per-path random source used by samplers and the simulators.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path, Stream stream)
      : engine_(seed, path, static_cast<std::uint32_t>(stream)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  Philox4x32 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace varlab
