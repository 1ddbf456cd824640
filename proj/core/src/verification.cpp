#include "jumplq/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

namespace jumplq {

CostReport summarize(std::vector<double> samples, bool keep_samples) {
  CostReport r;
  r.paths = static_cast<int>(samples.size());
  if (samples.empty()) return r;
  double sum = 0.0;
  for (double s : samples) sum += s;
  r.mean = sum / r.paths;
  if (r.paths > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - r.mean) * (s - r.mean);
    r.std_error = std::sqrt(ss / (r.paths - 1)) / std::sqrt(static_cast<double>(r.paths));
  }
  if (keep_samples) r.per_path = std::move(samples);
  return r;
}

IdentityReport make_report(std::string name, double lhs, double rhs, double gap, double tolerance) {
  return {std::move(name), lhs, rhs, gap, tolerance, std::abs(gap) <= tolerance};
}

double cost_along(const Trajectory& traj, const ValidatedProblem& prob) {
  const int N = prob.grid().steps;
  const double h = prob.grid().step();
  Vector QX(prob.n()), SX(prob.m()), Ru(prob.m());
  double running = 0.0;
  for (int k = 0; k < N; ++k) {
    const Coefficients& c = prob.at_index(k);
    const auto X = traj.X.col(k);
    const auto u = traj.u.col(k);
    QX.noalias() = c.Q * X;
    SX.noalias() = c.S * X;
    Ru.noalias() = c.R * u;
    running += QX.dot(X) + 2.0 * SX.dot(u) + Ru.dot(u) + 2.0 * c.q.dot(X) + 2.0 * c.rho.dot(u);
  }
  const auto XT = traj.X.col(N);
  QX.noalias() = prob.spec().H * XT;
  return h * running + QX.dot(XT) + 2.0 * prob.spec().g.dot(XT);
}

CostReport mc_cost(const ValidatedProblem& prob, const ControlLaw& law, const NoisePlan& plan,
                   int threads, bool keep_per_path) {
  std::vector<double> costs(static_cast<std::size_t>(plan.paths));
  parallel_for_paths(plan.paths, threads, [&](int p) {
    costs[static_cast<std::size_t>(p)] = cost_along(simulate_path(prob, law, plan, p), prob);
  });
  return summarize(std::move(costs), keep_per_path);
}

CostReport mc_cost(const ValidatedProblem& prob, const ClosedLoopStrategy& strategy,
                   const NoisePlan& plan, int threads, bool keep_per_path) {
  return mc_cost(prob, closed_loop_law(strategy), plan, threads, keep_per_path);
}

std::vector<Probe> default_probes(const ValidatedProblem& prob, int count, std::uint64_t seed) {
  constexpr int kPieces = 8;
  const int m = prob.m();
  const int N = prob.grid().steps;
  std::vector<Probe> probes;
  for (int i = 0; i < std::min(m, count); ++i) {
    std::vector<Vector> u(static_cast<std::size_t>(N), Vector::Unit(m, i));
    probes.push_back({"axis_" + std::to_string(i), open_loop_law(std::move(u))});
  }
  for (int j = 0; static_cast<int>(probes.size()) < count; ++j) {
    std::vector<Vector> levels;
    for (int piece = 0; piece < kPieces; ++piece) {
      CounterEngine engine(seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(piece),
                           0xffffu);
      std::normal_distribution<double> normal;
      Vector level(m);
      for (int i = 0; i < m; ++i) level(i) = normal(engine);
      levels.push_back(std::move(level));
    }
    std::vector<Vector> u;
    u.reserve(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
      u.push_back(levels[static_cast<std::size_t>(std::min(kPieces - 1, k * kPieces / N))]);
    }
    probes.push_back({"gaussian_" + std::to_string(j), open_loop_law(std::move(u))});
  }
  return probes;
}

double problem_scale(const ValidatedProblem& prob, const RiccatiSolution& ride) {
  double max_norm = 0.0;
  for (const auto& P : ride.P) max_norm = std::max(max_norm, spectral_norm(P));
  return 1.0 + max_norm * (1.0 + prob.spec().x0.squaredNorm());
}

double discretization_allowance(const ValidatedProblem& prob, const RiccatiSolution& ride,
                                double factor) {
  return factor * prob.grid().step() * problem_scale(prob, ride);
}

IdentityReport value_match(const ValidatedProblem& prob, const RiccatiSolution& ride,
                           const AdjointSolution& adj, const ClosedLoopStrategy& strategy,
                           const NoisePlan& plan, int threads, double allowance_factor) {
  const CostReport mc = mc_cost(prob, strategy, plan, threads);
  const double V = value_function(ride, adj, prob, 0, prob.spec().x0).total();
  return make_report("value_match", mc.mean, V, mc.mean - V,
                     3.0 * mc.std_error + discretization_allowance(prob, ride, allowance_factor));
}

std::vector<SquaresResult> completion_of_squares_check(const ValidatedProblem& prob,
                                                       const RiccatiSolution& ride,
                                                       const ClosedLoopStrategy& strategy,
                                                       const std::vector<Probe>& probes,
                                                       const NoisePlan& plan, int threads,
                                                       double allowance_factor) {
  const int N = prob.grid().steps;
  const double h = prob.grid().step();
  const double allowance = discretization_allowance(prob, ride, allowance_factor);
  const CostReport closed = mc_cost(prob, strategy, plan, threads, true);
  const ControlLaw closed_law = closed_loop_law(strategy);

  std::vector<SquaresResult> results;
  for (const auto& probe : probes) {
    const auto paths = static_cast<std::size_t>(plan.paths);
    std::vector<double> excess(paths), squares(paths), diff(paths);
    parallel_for_paths(plan.paths, threads, [&](int p) {
      const auto idx = static_cast<std::size_t>(p);
      const Trajectory traj = simulate_path(prob, probe.law, plan, p);
      double sq = 0.0;
      Vector feedback(prob.m());
      for (int k = 0; k < N; ++k) {
        const auto kdx = static_cast<std::size_t>(k);
        // Same arithmetic as the closed-loop law, so a self-probe gives delta == 0 exactly.
        closed_law(p, k, traj.X.col(k), feedback);
        const Vector delta = traj.u.col(k) - feedback;
        sq += (ride.ops[kdx].Rhat * delta).dot(delta);
      }
      excess[idx] = cost_along(traj, prob) - closed.per_path[idx];
      squares[idx] = h * sq;
      diff[idx] = excess[idx] - squares[idx];
    });
    const CostReport lhs = summarize(std::move(excess));
    const CostReport rhs = summarize(std::move(squares));
    const CostReport gap = summarize(std::move(diff));

    SquaresResult r;
    r.identity = make_report("completion_of_squares/" + probe.name, lhs.mean, rhs.mean, gap.mean,
                             3.0 * gap.std_error + allowance);
    r.optimality = make_report("optimality/" + probe.name, lhs.mean, 0.0,
                               std::max(0.0, -lhs.mean), 3.0 * lhs.std_error);
    results.push_back(std::move(r));
  }
  return results;
}

double stationarity_residual(const ValidatedProblem& prob, const RiccatiSolution& ride,
                             const AdjointSolution& adj, const ClosedLoopStrategy& strategy,
                             const NoisePlan& plan, int threads) {
  const int N = prob.grid().steps;
  const ControlLaw law = closed_loop_law(strategy);
  std::vector<double> worst(static_cast<std::size_t>(plan.paths), 0.0);
  parallel_for_paths(plan.paths, threads, [&](int p) {
    const Trajectory traj = simulate_path(prob, law, plan, p);
    double w = 0.0;
    for (int k = 0; k <= N; ++k) {
      const auto kdx = static_cast<std::size_t>(k);
      const Coefficients& c = prob.at_index(k);
      const Matrix& P = ride.P[kdx];
      const Matrix& theta = strategy.theta[kdx];
      const Vector& v = strategy.v[kdx];
      const Vector X = traj.X.col(k);

      const Vector Y = P * X + adj.eta[kdx];
      const Vector Z = P * ((c.C + c.D * theta) * X) + P * (c.D * v) + P * c.sigma + adj.zeta[kdx];
      Vector r = c.B.transpose() * Y + c.D.transpose() * Z + (c.S + c.R * theta) * X + c.R * v + c.rho;
      for (std::size_t i = 0; i < c.pi.size(); ++i) {
        const Vector Ki = P * ((c.F[i] + c.G[i] * theta) * X) + P * (c.G[i] * v) + P * c.f[i] +
                          adj.psi[kdx][i];
        r.noalias() += c.pi[i] * c.G[i].transpose() * Ki;
      }
      w = std::max(w, r.norm());
    }
    worst[static_cast<std::size_t>(p)] = w;
  });
  return worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

ConvexityResult convexity_probe(const ValidatedProblem& prob, const std::vector<Probe>& probes,
                                const NoisePlan& plan, int threads) {
  const ValidatedProblem homogeneous = homogeneous_part(prob);
  ConvexityResult result;
  for (const auto& probe : probes) {
    CostReport r = mc_cost(homogeneous, probe.law, plan, threads);
    if (result.per_probe.empty() || r.mean < result.min_value) {
      result.min_value = r.mean;
      result.std_error = r.std_error;
      result.probe = probe.name;
    }
    result.per_probe.push_back(std::move(r));
  }
  return result;
}

IdentityReport equivalence_check(const ValidatedProblem& prob, const ClosedLoopStrategy& strategy,
                                 const NoisePlan& plan, int threads) {
  const ControlLaw law = closed_loop_law(strategy);
  const auto paths = static_cast<std::size_t>(plan.paths);
  std::vector<double> closed(paths), replay(paths), gaps(paths);
  parallel_for_paths(plan.paths, threads, [&](int p) {
    const auto idx = static_cast<std::size_t>(p);
    const Trajectory cl = simulate_path(prob, law, plan, p);
    // Open-loop control defined path-wise by the recorded outcome.
    const ControlLaw recorded = [&cl](int, int k, const Eigen::Ref<const Vector>&,
                                      Eigen::Ref<Vector> u) { u = cl.u.col(k); };
    const Trajectory ol = simulate_path(prob, recorded, plan, p);
    double gap = (cl.X - ol.X).cwiseAbs().maxCoeff();
    closed[idx] = cost_along(cl, prob);
    replay[idx] = cost_along(ol, prob);
    gaps[idx] = std::max(gap, std::abs(closed[idx] - replay[idx]));
  });
  const CostReport a = summarize(std::move(closed));
  const CostReport b = summarize(std::move(replay));
  double gap = *std::max_element(gaps.begin(), gaps.end());
  if (a.mean != b.mean || a.std_error != b.std_error) gap = std::max(gap, std::abs(a.mean - b.mean));
  return make_report("equivalence_replay", a.mean, b.mean, gap, 0.0);
}

bool VerificationRun::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityReport& r) { return r.pass; });
}

VerificationRun run_verification(const ValidatedProblem& prob, const RiccatiSolution& ride,
                                 const AdjointSolution& adj, const ClosedLoopStrategy& strategy,
                                 const NoisePlan& plan, const VerificationSettings& settings,
                                 int threads) {
  VerificationRun run;
  run.checks.push_back(value_match(prob, ride, adj, strategy, plan, threads, settings.allowance_factor));

  const auto square_probes = default_probes(prob, settings.square_probes, settings.probe_seed);
  for (auto& r : completion_of_squares_check(prob, ride, strategy, square_probes, plan, threads,
                                             settings.allowance_factor)) {
    run.checks.push_back(std::move(r.identity));
    run.checks.push_back(std::move(r.optimality));
  }

  const double residual = stationarity_residual(prob, ride, adj, strategy, plan, threads);
  run.checks.push_back(make_report("stationarity_residual", residual, 0.0, residual,
                                   settings.stationarity_tolerance * problem_scale(prob, ride)));

  const auto convex_probes =
      default_probes(prob, settings.convexity_probes, settings.probe_seed + 1);
  const ConvexityResult convex = convexity_probe(prob, convex_probes, plan, threads);
  run.checks.push_back(make_report("convexity/" + convex.probe, convex.min_value, 0.0,
                                   std::max(0.0, -convex.min_value), 3.0 * convex.std_error));

  run.checks.push_back(equivalence_check(prob, strategy, plan, threads));
  return run;
}

std::string verification_json(const VerificationRun& run, const NoisePlan& plan, int steps) {
  using nlohmann::json;
  json checks = json::array();
  for (const auto& c : run.checks) {
    checks.push_back({{"name", c.name},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"gap", c.gap},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  }
  json doc = {{"checks", std::move(checks)},
              {"environment", {{"seed", plan.master_seed}, {"N", steps}, {"paths", plan.paths}}},
              {"pass", run.all_pass()}};
  return doc.dump(2) + "\n";
}

}  // namespace jumplq
