#include "jumplq/noise.hpp"

#include <cmath>
#include <random>

namespace jumplq {
namespace {

// splitmix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

CounterEngine::CounterEngine(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                             std::uint32_t channel) {
  std::uint64_t k = mix(seed + kGolden);
  k = mix(k ^ (path + kGolden));
  k = mix(k ^ (step + 2 * kGolden));
  k = mix(k ^ (static_cast<std::uint64_t>(channel) + 3 * kGolden));
  key_ = k;
}

CounterEngine::result_type CounterEngine::operator()() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double NoisePlan::brownian(int path, int step, double h) const {
  CounterEngine engine(master_seed, static_cast<std::uint64_t>(path),
                       static_cast<std::uint64_t>(step), kBrownianChannel);
  std::normal_distribution<double> normal(0.0, std::sqrt(h));
  return normal(engine);
}

int NoisePlan::jump_count(int path, int step, int mark, double mean) const {
  if (mean <= 0.0) return 0;
  CounterEngine engine(master_seed, static_cast<std::uint64_t>(path),
                       static_cast<std::uint64_t>(step), mark_channel(mark));
  std::poisson_distribution<int> poisson(mean);
  return poisson(engine);
}

}  // namespace jumplq
