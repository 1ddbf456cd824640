#include <benchmark/benchmark.h>

#include <random>

#include "jumplq/feedforward.hpp"
#include "jumplq/linalg.hpp"
#include "jumplq/riccati.hpp"
#include "jumplq/simulation.hpp"
#include "jumplq/verification.hpp"

using namespace jumplq;

namespace {

ValidatedProblem random_problem(int n, int m, int marks, int steps) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  auto rand = [&](int r, int c, double scale) {
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = scale * normal(rng);
    return M;
  };
  ProblemSpec s = zero_spec(n, m, marks, {0.0, 1.0, steps});
  s.A = CoefficientPath::constant(rand(n, n, 0.3));
  s.B = CoefficientPath::constant(rand(n, m, 0.5));
  s.C = CoefficientPath::constant(rand(n, n, 0.2));
  s.D = CoefficientPath::constant(rand(n, m, 0.2));
  for (int i = 0; i < marks; ++i) {
    s.marks[static_cast<std::size_t>(i)].intensity = 0.5 + i;
    s.F[static_cast<std::size_t>(i)] = CoefficientPath::constant(rand(n, n, 0.2));
    s.G[static_cast<std::size_t>(i)] = CoefficientPath::constant(rand(n, m, 0.2));
  }
  const Matrix q = rand(n, n, 1.0);
  const Matrix r = rand(m, m, 1.0);
  s.Q = CoefficientPath::constant(q * q.transpose() + Matrix::Identity(n, n));
  s.R = CoefficientPath::constant(r * r.transpose() + Matrix::Identity(m, m));
  s.H = Matrix::Identity(n, n);
  s.b = CoefficientPath::constant(rand(n, 1, 0.5));
  s.sigma = CoefficientPath::constant(rand(n, 1, 0.5));
  s.x0 = Vector::Ones(n);
  return validate(std::move(s));
}

void BM_Pinv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Matrix M(n, n);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(pinv(M));
}
BENCHMARK(BM_Pinv)->Arg(2)->Arg(8)->Arg(32);

void BM_SolveRide(benchmark::State& state) {
  const auto prob = random_problem(static_cast<int>(state.range(0)), 2, 2, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ride(prob));
}
BENCHMARK(BM_SolveRide)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SolveEta(benchmark::State& state) {
  const auto prob = random_problem(3, 2, 2, 1000);
  const auto ride = solve_ride(prob);
  for (auto _ : state) benchmark::DoNotOptimize(solve_eta(prob, ride));
}
BENCHMARK(BM_SolveEta)->Unit(benchmark::kMillisecond);

void BM_ClosedLoopCost(benchmark::State& state) {
  const auto prob = random_problem(3, 2, 2, 1000);
  const auto ride = solve_ride(prob);
  const auto strategy = make_strategy(ride, solve_eta(prob, ride));
  const NoisePlan plan{1, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(mc_cost(prob, strategy, plan));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClosedLoopCost)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_NoiseDraws(benchmark::State& state) {
  const NoisePlan plan{3, 1};
  int k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan.brownian(0, k, 1e-3));
    benchmark::DoNotOptimize(plan.jump_count(0, k, 0, 1e-3));
    ++k;
  }
}
BENCHMARK(BM_NoiseDraws);

}  // namespace
BENCHMARK_MAIN();
