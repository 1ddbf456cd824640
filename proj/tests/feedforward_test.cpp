#include "jumplq/feedforward.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "jumplq/errors.hpp"
#include "test_problems.hpp"

namespace jumplq {
namespace {

using testing::constant;
using testing::scalar;

Vector vec1(double v) { return Vector::Constant(1, v); }

/// P-squared problem driven by a unit drift: P = 1/(2-t), eta = (1-t)/(2-t).
ProblemSpec drifted_square_spec(int steps) {
  ProblemSpec s = testing::riccati_square_spec(steps);
  s.b = constant(1.0);
  return s;
}

double eta_exact(double t) { return (1.0 - t) / (2.0 - t); }

struct Solved {
  ValidatedProblem prob;
  RiccatiSolution ride;
  AdjointSolution adj;
};

Solved solve_all(ProblemSpec s) {
  auto prob = validate(std::move(s));
  auto ride = solve_ride(prob);
  auto adj = solve_eta(prob, ride);
  return {prob, std::move(ride), std::move(adj)};
}

// ---- right-hand side ---------------------------------------------------

TEST(EtaRhs, HomogeneousCaseIsTransposedClosedLoopDrift) {
  auto s = testing::random_spec(3, 3, 2, 2, 10, false);
  s.g = Vector::Constant(3, 0.7);
  const auto prob = validate(s);
  std::mt19937_64 rng(1);
  const Matrix P = testing::random_spd(rng, 3);
  const Vector eta = testing::random_matrix(rng, 3, 1);
  const Coefficients& c = prob.at_index(2);
  const auto ops = assemble_gain_ops(P, c);
  const Matrix theta = -ops.Rhat.inverse() * ops.Lcal;
  const Vector expected = -(c.A + c.B * theta).transpose() * eta;
  EXPECT_LE((eta_rhs(eta, P, c) - expected).norm(), 1e-12 * (1.0 + expected.norm()));
}

TEST(EtaRhs, UnitRunningCostGivesMinusOne) {
  ProblemSpec s = testing::scalar_spec(10);
  s.q = constant(1.0);
  const auto prob = validate(s);
  EXPECT_EQ(eta_rhs(vec1(0.3), scalar(0.0), prob.at_index(0))(0), -1.0);
}

TEST(EtaRhs, HandEvaluatedDriftCase) {
  ProblemSpec s = testing::scalar_spec(10);
  s.B = constant(1.0);
  s.b = constant(1.0);
  const auto prob = validate(s);
  for (double eta : {-1.0, 0.0, 2.0}) {
    // Theta = -0.5, bracket = -0.5 eta + 0.5.
    EXPECT_DOUBLE_EQ(eta_rhs(vec1(eta), 0.4, scalar(0.5), prob)(0), 0.5 * eta - 0.5);
  }
}

// ---- backward solve ----------------------------------------------------

TEST(SolveEta, ZeroDriftKeepsTerminalValue) {
  ProblemSpec s = testing::scalar_spec(100);
  s.g = vec1(1.75);
  const auto sol = solve_all(s);
  for (const auto& e : sol.adj.eta) EXPECT_EQ(e(0), 1.75);
}

TEST(SolveEta, UnitRunningCostIntegrates) {
  ProblemSpec s = testing::scalar_spec(100);
  s.q = constant(1.0);
  const auto sol = solve_all(s);
  EXPECT_NEAR(sol.adj.eta.front()(0), 1.0, 1e-13);
  EXPECT_NEAR(sol.adj.eta[50](0), 0.5, 1e-13);
}

TEST(SolveEta, DriftedSquareClosedForm) {
  const auto sol = solve_all(drifted_square_spec(1000));
  double worst = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    worst = std::max(worst, std::abs(sol.adj.eta[static_cast<std::size_t>(k)](0) -
                                     eta_exact(sol.adj.grid.time(k))));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(SolveEta, AgreesWithFineEulerOracle) {
  // Coupled jump-control problem with drift; the oracle integrates P and eta
  // together with explicit Euler on a 10^6 grid.
  ProblemSpec s = testing::jump_control_spec(1000);
  s.b = constant(0.5);
  s.f[0] = constant(0.3);
  s.rho = constant(0.2);
  const auto sol = solve_all(s);

  const int N = 1'000'000;
  const double h = 1.0 / N;
  double P = 1.0, eta = 0.0;
  for (int k = N; k > 0; --k) {
    const double Rhat = 1.0 + P, L = P;
    const double w = eta + P * 0.3 + 0.2;
    const double dP = L * L / Rhat;
    // With A = C = F = 0 the bracket collapses to Theta * w + P * b.
    const double deta = -((-L / Rhat) * w + P * 0.5);
    P -= h * dP;
    eta -= h * deta;
  }
  EXPECT_NEAR(sol.ride.P.front()(0, 0), P, 1e-6);
  EXPECT_NEAR(sol.adj.eta.front()(0), eta, 1e-6);
}

TEST(SolveEta, MartingaleComponentsVanish) {
  const auto sol = solve_all(testing::random_spec(9, 3, 2, 2, 50));
  for (const auto& z : sol.adj.zeta) EXPECT_TRUE(z.isZero(0.0));
  for (const auto& row : sol.adj.psi) {
    ASSERT_EQ(row.size(), 2u);
    for (const auto& p : row) EXPECT_TRUE(p.isZero(0.0));
  }
  for (bool ok : sol.adj.range_ok) EXPECT_TRUE(ok);
}

TEST(SolveEta, FeedforwardOutsideRangeIsUnsolvable) {
  ProblemSpec s = testing::scalar_spec(20);
  s.R = constant(0.0);
  s.rho = constant(1.0);
  s.H = scalar(1.0);
  const auto prob = validate(s);
  const auto ride = solve_ride(prob);
  try {
    solve_eta(prob, ride);
    FAIL() << "expected ClosedLoopUnsolvable";
  } catch (const ClosedLoopUnsolvable& e) {
    EXPECT_EQ(e.reason(), Regularity::RangeFeedforward);
  }
}

// ---- feedforward -------------------------------------------------------

TEST(FeedforwardV, ZeroInhomogeneityGivesZero) {
  const auto sol = solve_all(testing::random_spec(2, 3, 2, 2, 50, false));
  for (const auto& v : feedforward_v(sol.adj, sol.ride)) EXPECT_TRUE(v.isZero(0.0));
}

TEST(FeedforwardV, ConstantRhoWithoutControlEntry) {
  ProblemSpec s = testing::scalar_spec(50);
  s.rho = constant(1.0);
  const auto sol = solve_all(s);
  for (const auto& v : feedforward_v(sol.adj, sol.ride)) EXPECT_EQ(v(0), -1.0);
}

TEST(FeedforwardV, StationarityResidual) {
  for (const auto& spec : {drifted_square_spec(500), testing::random_spec(44, 3, 2, 2, 500)}) {
    const auto sol = solve_all(spec);
    const auto v = feedforward_v(sol.adj, sol.ride);
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_LE((sol.ride.ops[k].Rhat * v[k] + sol.adj.w[k]).norm(), 1e-10) << k;
    }
  }
}

TEST(Strategy, IndependentOfInitialState) {
  auto a = testing::random_spec(71, 3, 2, 2, 100);
  auto b = a;
  b.x0 = Vector::Constant(3, 42.0);
  const auto sa = solve_all(a), sb = solve_all(b);
  const auto ka = make_strategy(sa.ride, sa.adj), kb = make_strategy(sb.ride, sb.adj);
  for (std::size_t k = 0; k < ka.theta.size(); ++k) {
    EXPECT_TRUE(ka.theta[k] == kb.theta[k]);
    EXPECT_TRUE(ka.v[k] == kb.v[k]);
  }
}

TEST(Strategy, InterpolatesBetweenGridPoints) {
  const auto sol = solve_all(drifted_square_spec(10));
  const auto strat = make_strategy(sol.ride, sol.adj);
  EXPECT_EQ(strat.theta_at(0.3), strat.theta[3]);
  const double mid = 0.5 * (strat.v[3](0) + strat.v[4](0));
  EXPECT_NEAR(strat.v_at(0.35)(0), mid, 1e-15);
  EXPECT_THROW(strat.v_at(1.2), OutOfHorizon);
}

// ---- value function ----------------------------------------------------

TEST(ValueFunction, HomogeneousIsPureQuadratic) {
  const auto sol = solve_all(testing::riccati_square_spec(1000));
  const auto v = value_function(sol.ride, sol.adj, sol.prob, 0, vec1(2.0));
  EXPECT_NEAR(v.total(), 2.0, 1e-8);
  EXPECT_EQ(v.linear, 0.0);
  EXPECT_EQ(v.integral, 0.0);
}

TEST(ValueFunction, TerminalLinearCostOnly) {
  ProblemSpec s = testing::scalar_spec(100);
  s.g = vec1(3.0);
  const auto sol = solve_all(s);
  EXPECT_DOUBLE_EQ(value_function(sol.ride, sol.adj, sol.prob, 0.0, vec1(2.0)).total(), 12.0);
}

TEST(ValueFunction, AffineQuadraticStructureInState) {
  const auto sol = solve_all(testing::random_spec(55, 3, 2, 2, 200));
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = testing::random_matrix(rng, 3, 1);
    const int k = trial * 20;
    const double vp = value_function(sol.ride, sol.adj, sol.prob, k, x).total();
    const double vm = value_function(sol.ride, sol.adj, sol.prob, k, Vector(-x)).total();
    const double v0 = value_function(sol.ride, sol.adj, sol.prob, k, Vector::Zero(3)).total();
    const auto idx = static_cast<std::size_t>(k);
    const double scale = 1.0 + std::abs(v0) + x.squaredNorm() * sol.ride.P[idx].norm();
    EXPECT_NEAR(vp + vm - 2.0 * v0, 2.0 * x.dot(sol.ride.P[idx] * x), 1e-12 * scale);
    EXPECT_NEAR(vp - vm, 4.0 * sol.adj.eta[idx].dot(x), 1e-12 * scale);
  }
}

TEST(ValueFunction, DriftedSquareMatchesQuadrature) {
  // V(0,x) = x^2/2 + 2 eta(0) x + int_0^1 (2 eta - eta^2) dt with eta = (1-t)/(2-t);
  // the integral equals 1 - ln 2 + ... evaluated here by a fine Simpson rule.
  const int M = 200000;
  double integral = 0.0;
  for (int i = 0; i <= M; ++i) {
    const double t = static_cast<double>(i) / M;
    const double e = eta_exact(t);
    const double wgt = (i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += wgt * (2.0 * e - e * e);
  }
  integral /= 3.0 * M;
  const double x = 1.5;
  const double exact = 0.5 * x * x + 2.0 * 0.5 * x + integral;

  auto error = [&](int steps) {
    const auto sol = solve_all(drifted_square_spec(steps));
    return std::abs(value_function(sol.ride, sol.adj, sol.prob, 0, vec1(x)).total() - exact);
  };
  EXPECT_LE(error(1000), 1e-6);
  const double ratio = error(50) / error(100);
  EXPECT_NEAR(ratio, 4.0, 0.3 * 4.0);
}

TEST(ValueFunction, OffGridTimeIsRejected) {
  const auto sol = solve_all(testing::riccati_square_spec(10));
  EXPECT_THROW(value_function(sol.ride, sol.adj, sol.prob, 0.05, vec1(1.0)), OutOfHorizon);
  EXPECT_THROW(value_function(sol.ride, sol.adj, sol.prob, 11, vec1(1.0)), OutOfHorizon);
  EXPECT_NO_THROW(value_function(sol.ride, sol.adj, sol.prob, 0.5, vec1(1.0)));
}

TEST(ValueFunction, TerminalTimeIsTerminalCost) {
  const auto sol = solve_all(testing::random_spec(8, 3, 2, 2, 100));
  const Vector x = Vector::LinSpaced(3, -1.0, 2.0);
  const double expected = x.dot(sol.prob.spec().H * x) + 2.0 * sol.prob.spec().g.dot(x);
  EXPECT_NEAR(value_function(sol.ride, sol.adj, sol.prob, 100, x).total(), expected, 1e-12);
}

}  // namespace
}  // namespace jumplq
