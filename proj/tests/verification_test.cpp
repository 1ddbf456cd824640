#include "jumplq/verification.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_problems.hpp"

namespace jumplq {
namespace {

using testing::constant;
using testing::scalar;

Vector vec1(double v) { return Vector::Constant(1, v); }

struct Solved {
  ValidatedProblem prob;
  RiccatiSolution ride;
  AdjointSolution adj;
  ClosedLoopStrategy strategy;
};

Solved solve_all(ProblemSpec s) {
  auto prob = validate(std::move(s));
  auto ride = solve_ride(prob);
  auto adj = solve_eta(prob, ride);
  auto strategy = make_strategy(ride, adj);
  return {prob, std::move(ride), std::move(adj), std::move(strategy)};
}

ProblemSpec g_only_spec(int steps = 100) {
  ProblemSpec s = testing::scalar_spec(steps);
  s.g = vec1(3.0);
  s.x0 = vec1(2.0);
  return s;
}

// ---- cost_along --------------------------------------------------------

TEST(CostAlong, ZeroWeightsCostNothing) {
  ProblemSpec s = zero_spec(2, 1, 1, {0.0, 1.0, 20});
  s.marks[0].intensity = 1.0;
  s.A = CoefficientPath::constant(Matrix::Identity(2, 2));
  s.x0 = Vector::Ones(2);
  const auto prob = validate(s);
  for (const auto& t : simulate_open_loop(prob, std::vector<Vector>(20, Vector::Ones(1)), {1, 3})) {
    EXPECT_EQ(cost_along(t, prob), 0.0);
  }
}

TEST(CostAlong, ConstantStateRunningCost) {
  ProblemSpec s = zero_spec(1, 1, 0, {0.0, 1.0, 100});
  s.Q = constant(1.0);
  s.x0 = vec1(1.5);
  const auto prob = validate(s);
  const auto t = simulate_open_loop(prob, std::vector<Vector>(100, vec1(0.0)), {0, 1})[0];
  EXPECT_NEAR(cost_along(t, prob), 2.25, prob.grid().step() * 2.25);
}

TEST(CostAlong, TerminalLinearCost) {
  const auto prob = validate(g_only_spec());
  const auto t = simulate_open_loop(prob, std::vector<Vector>(100, vec1(0.0)), {0, 1})[0];
  EXPECT_EQ(cost_along(t, prob), 12.0);
}

TEST(CostAlong, MatchesHandQuadratureOnRandomPath) {
  const auto prob = validate(testing::random_spec(1, 3, 2, 2, 30));
  const auto t = simulate_open_loop(prob, std::vector<Vector>(30, Vector::LinSpaced(2, -1, 1)), {4, 1})[0];
  const double h = prob.grid().step();
  double expected = 0.0;
  for (int k = 0; k < 30; ++k) {
    const Coefficients& c = prob.at_index(k);
    const Vector x = t.X.col(k), u = t.u.col(k);
    expected += h * (x.dot(c.Q * x) + 2 * (c.S * x).dot(u) + u.dot(c.R * u) + 2 * c.q.dot(x) +
                     2 * c.rho.dot(u));
  }
  const Vector xT = t.X.col(30);
  expected += xT.dot(prob.spec().H * xT) + 2 * prob.spec().g.dot(xT);
  EXPECT_NEAR(cost_along(t, prob), expected, 1e-12 * (1 + std::abs(expected)));
}

// ---- mc_cost -----------------------------------------------------------

TEST(McCost, NoiselessProblemHasZeroError) {
  const auto sol = solve_all(testing::riccati_square_spec(200));
  const auto report = mc_cost(sol.prob, sol.strategy, {5, 40});
  EXPECT_EQ(report.std_error, 0.0);
  const auto single = simulate_closed_loop(sol.prob, sol.strategy, {5, 1})[0];
  EXPECT_EQ(report.mean, cost_along(single, sol.prob));
  EXPECT_EQ(report.paths, 40);
}

TEST(McCost, TerminalLinearCostOnly) {
  const auto sol = solve_all(g_only_spec());
  const auto report = mc_cost(sol.prob, sol.strategy, {1, 100});
  EXPECT_EQ(report.mean, 12.0);
  EXPECT_EQ(report.std_error, 0.0);
}

TEST(McCost, SamePlanSameReport) {
  const auto sol = solve_all(testing::random_spec(2, 3, 2, 2, 100));
  const NoisePlan plan{17, 200};
  const auto a = mc_cost(sol.prob, sol.strategy, plan, 1, true);
  const auto b = mc_cost(sol.prob, sol.strategy, plan, 4, true);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.per_path, b.per_path);
  EXPECT_TRUE(mc_cost(sol.prob, sol.strategy, plan).per_path.empty());
}

TEST(McCost, SummaryStatistics) {
  const auto r = summarize({1.0, 2.0, 3.0, 4.0}, true);
  EXPECT_DOUBLE_EQ(r.mean, 2.5);
  // Sample std of 1..4 is sqrt(5/3).
  EXPECT_DOUBLE_EQ(r.std_error, std::sqrt(5.0 / 3.0) / 2.0);
  EXPECT_EQ(r.per_path.size(), 4u);
}

TEST(ValueMatch, NoisyScalarProblem) {
  ProblemSpec s = testing::riccati_square_spec(500);
  s.sigma = constant(1.0);
  s.b = constant(1.0);
  const auto sol = solve_all(s);
  const auto report = value_match(sol.prob, sol.ride, sol.adj, sol.strategy, {11, 2000});
  EXPECT_TRUE(report.pass) << report.gap << " vs " << report.tolerance;
  const double V = value_function(sol.ride, sol.adj, sol.prob, 0, s.x0).total();
  EXPECT_EQ(report.rhs, V);
}

// ---- completion of squares --------------------------------------------

TEST(CompletionOfSquares, SelfProbeIsExactlyZero) {
  const auto sol = solve_all(testing::random_spec(3, 3, 2, 2, 100));
  const std::vector<Probe> probes{{"self", closed_loop_law(sol.strategy)}};
  const auto results = completion_of_squares_check(sol.prob, sol.ride, sol.strategy, probes, {2, 50});
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].identity.lhs, 0.0);
  EXPECT_EQ(results[0].identity.rhs, 0.0);
  EXPECT_TRUE(results[0].identity.pass);
  EXPECT_TRUE(results[0].optimality.pass);
}

Probe shifted_feedback(const ClosedLoopStrategy& strategy, double shift) {
  ClosedLoopStrategy shifted = strategy;
  for (auto& v : shifted.v) v.array() += shift;
  return {"shifted", closed_loop_law(std::move(shifted))};
}

TEST(CompletionOfSquares, NoiselessConstantShift) {
  const auto sol = solve_all(testing::riccati_square_spec(400));
  const auto r = completion_of_squares_check(sol.prob, sol.ride, sol.strategy,
                                             {shifted_feedback(sol.strategy, 0.1)}, {0, 4})[0];
  const double h = sol.prob.grid().step();
  double expected = 0.0;
  for (int k = 0; k < 400; ++k) expected += h * sol.ride.ops[static_cast<std::size_t>(k)].Rhat(0, 0) * 0.01;
  EXPECT_NEAR(r.identity.rhs, expected, 1e-14);
  EXPECT_NEAR(r.identity.lhs, expected, 10.0 * h * 0.01);
  EXPECT_TRUE(r.identity.pass);
  EXPECT_GT(r.identity.lhs, 0.0);
}

TEST(CompletionOfSquares, DiscretizationGapShrinksLinearly) {
  auto gap = [](int steps) {
    ProblemSpec s = testing::riccati_square_spec(steps);
    s.b = constant(0.5);
    const auto sol = solve_all(s);
    const auto r = completion_of_squares_check(sol.prob, sol.ride, sol.strategy,
                                               {shifted_feedback(sol.strategy, 0.3)}, {0, 1})[0];
    return std::abs(r.identity.gap);
  };
  const double ratio = gap(200) / gap(400);
  EXPECT_NEAR(ratio, 2.0, 0.3 * 2.0);
}

TEST(CompletionOfSquaresProperty, RandomProblemsRandomProbes) {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const auto sol = solve_all(testing::random_spec(seed, 3, 2, 2, 200));
    const auto probes = default_probes(sol.prob, 5, seed);
    ASSERT_EQ(probes.size(), 5u);
    for (const auto& r : completion_of_squares_check(sol.prob, sol.ride, sol.strategy, probes, {seed, 400})) {
      EXPECT_TRUE(r.identity.pass) << r.identity.name << " gap " << r.identity.gap << " tol "
                                   << r.identity.tolerance;
      EXPECT_TRUE(r.optimality.pass) << r.optimality.name;
      EXPECT_GE(r.identity.rhs, 0.0);
    }
  }
}

// ---- stationarity ------------------------------------------------------

TEST(Stationarity, HomogeneousRandomProblem) {
  const auto sol = solve_all(testing::random_spec(41, 3, 2, 2, 200, false));
  const double residual = stationarity_residual(sol.prob, sol.ride, sol.adj, sol.strategy, {1, 30});
  EXPECT_LE(residual, 1e-8 * problem_scale(sol.prob, sol.ride));
}

TEST(Stationarity, InhomogeneousRandomProblem) {
  const auto sol = solve_all(testing::random_spec(42, 3, 2, 2, 200));
  const double residual = stationarity_residual(sol.prob, sol.ride, sol.adj, sol.strategy, {1, 30});
  EXPECT_LE(residual, 1e-8 * problem_scale(sol.prob, sol.ride));
}

TEST(Stationarity, ZeroProblemIsExactlyZero) {
  const auto sol = solve_all(testing::scalar_spec(50));
  EXPECT_EQ(stationarity_residual(sol.prob, sol.ride, sol.adj, sol.strategy, {1, 5}), 0.0);
}

TEST(Stationarity, TerminalLinearCostIsExactlyZero) {
  const auto sol = solve_all(g_only_spec(50));
  EXPECT_EQ(stationarity_residual(sol.prob, sol.ride, sol.adj, sol.strategy, {1, 5}), 0.0);
}

TEST(Stationarity, CorruptedGainIsDetected) {
  const auto sol = solve_all(testing::random_spec(43, 3, 2, 2, 200));
  ClosedLoopStrategy bad = sol.strategy;
  bad.theta[50](0, 0) += 0.01;
  const double residual = stationarity_residual(sol.prob, sol.ride, sol.adj, bad, {1, 5});
  EXPECT_GT(residual, 1e-4 * problem_scale(sol.prob, sol.ride) * 1e-2);
  EXPECT_GT(residual, 1e-8 * problem_scale(sol.prob, sol.ride));
}

TEST(StationarityProperty, IndependentOfPathCount) {
  const auto sol = solve_all(testing::random_spec(44, 3, 2, 2, 100));
  const double scale = problem_scale(sol.prob, sol.ride);
  for (int paths : {1, 10, 100}) {
    EXPECT_LE(stationarity_residual(sol.prob, sol.ride, sol.adj, sol.strategy, {5, paths}), 1e-8 * scale);
  }
}

// ---- convexity ---------------------------------------------------------

std::vector<Probe> constant_probe(int steps, double value) {
  return {{"const", open_loop_law(std::vector<Vector>(static_cast<std::size_t>(steps), vec1(value)))}};
}

TEST(Convexity, PositiveControlWeight) {
  ProblemSpec s = testing::scalar_spec(100);
  s.R = constant(2.0);
  const auto prob = validate(s);
  const auto r = convexity_probe(prob, constant_probe(100, 0.5), {0, 10});
  EXPECT_NEAR(r.min_value, 0.5, 1e-12);
  EXPECT_TRUE(r.consistent());
}

TEST(Convexity, NegativeControlWeightCertifiesFailure) {
  ProblemSpec s = testing::scalar_spec(100);
  s.R = constant(-1.0);
  const auto r = convexity_probe(validate(s), constant_probe(100, 1.0), {0, 10});
  EXPECT_NEAR(r.min_value, -1.0, 1e-12);
  EXPECT_LT(r.min_value, 0.0);
  EXPECT_FALSE(r.consistent());
}

TEST(Convexity, IgnoresInhomogeneities) {
  ProblemSpec s = testing::scalar_spec(100);
  s.b = constant(5.0);
  s.g = vec1(-3.0);
  s.x0 = vec1(10.0);
  const auto r = convexity_probe(validate(s), constant_probe(100, 1.0), {0, 10});
  EXPECT_NEAR(r.min_value, 1.0, 1e-12);
}

TEST(ConvexityProperty, RandomPsdProblemRandomProbes) {
  for (std::uint64_t seed : {51u, 52u}) {
    const auto prob = validate(testing::random_spec(seed, 3, 2, 2, 100));
    const auto r = convexity_probe(prob, default_probes(prob, 20, seed), {seed, 100});
    EXPECT_EQ(r.per_probe.size(), 20u);
    EXPECT_TRUE(r.consistent()) << r.probe << " " << r.min_value;
  }
}

// ---- equivalence -------------------------------------------------------

TEST(Equivalence, ReplayIsBitExact) {
  for (std::uint64_t seed : {61u, 62u}) {
    const auto sol = solve_all(testing::random_spec(seed, 3, 2, 2, 100));
    const auto r = equivalence_check(sol.prob, sol.strategy, {seed, 50});
    EXPECT_EQ(r.gap, 0.0);
    EXPECT_EQ(r.lhs, r.rhs);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Equivalence, ZeroDynamicsCostIsTerminalCost) {
  ProblemSpec s = testing::scalar_spec(50);
  s.H = scalar(2.0);
  s.x0 = vec1(3.0);
  // Zero B, D, G leave the state untouched whatever the control.
  const auto sol = solve_all(s);
  const auto r = equivalence_check(sol.prob, sol.strategy, {0, 5});
  EXPECT_EQ(r.lhs, 18.0);
  EXPECT_EQ(r.rhs, 18.0);
}

TEST(Equivalence, QuadraticProblem) {
  const auto sol = solve_all(testing::riccati_square_spec(200));
  const auto r = equivalence_check(sol.prob, sol.strategy, {9, 20});
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.lhs, r.rhs);
}

// ---- full run ----------------------------------------------------------

TEST(RunVerification, QuadraticProblemPassesEverything) {
  const auto sol = solve_all(testing::riccati_square_spec(200));
  const NoisePlan plan{0, 200};
  const auto run = run_verification(sol.prob, sol.ride, sol.adj, sol.strategy, plan);
  for (const auto& c : run.checks) EXPECT_TRUE(c.pass) << c.name;
  EXPECT_TRUE(run.all_pass());
  const std::string doc = verification_json(run, plan, 200);
  EXPECT_NE(doc.find("\"environment\""), std::string::npos);
  EXPECT_NE(doc.find("\"stationarity_residual\""), std::string::npos);
}

TEST(RunVerification, ProbeReportsMatchIdentityRule) {
  const auto r = make_report("x", 1.0, 0.5, 0.5, 0.5);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(make_report("x", 1.0, 0.5, -0.51, 0.5).pass);
}

}  // namespace
}  // namespace jumplq
