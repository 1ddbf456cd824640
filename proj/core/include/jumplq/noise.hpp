#pragma once

#include <cstdint>
#include <limits>

namespace jumplq {

/// Counter-based bit generator: the output stream is a pure function of the
/// key (seed, path, step, channel), so draws never depend on evaluation order
/// or thread count. Satisfies UniformRandomBitGenerator.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  CounterEngine(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint32_t channel);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Channel 0 drives the Brownian increment; channel i+1 drives mark i.
inline constexpr std::uint32_t kBrownianChannel = 0;
constexpr std::uint32_t mark_channel(int mark) { return static_cast<std::uint32_t>(mark) + 1; }

/// Reproducible noise for a batch of paths.
struct NoisePlan {
  std::uint64_t master_seed = 0;
  int paths = 1;

  /// Increment W(t_{k+1}) - W(t_k) ~ Normal(0, h).
  double brownian(int path, int step, double h) const;

  /// Number of mark-i jumps in step k ~ Poisson(intensity * h).
  int jump_count(int path, int step, int mark, double mean) const;
};

}  // namespace jumplq
