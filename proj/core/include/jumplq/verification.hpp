#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jumplq/feedforward.hpp"
#include "jumplq/simulation.hpp"

namespace jumplq {

/// Monte Carlo estimate of a cost functional.
struct CostReport {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample std / sqrt(paths)
  int paths = 0;
  std::vector<double> per_path;  ///< kept only on request
};

/// Mean and standard error of `samples`, summed in index order.
CostReport summarize(std::vector<double> samples, bool keep_samples = false);

/// One named check: pass iff |gap| <= tolerance.
struct IdentityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

IdentityReport make_report(std::string name, double lhs, double rhs, double gap, double tolerance);

/// Left-endpoint rectangle rule for the running cost plus the terminal cost.
double cost_along(const Trajectory& traj, const ValidatedProblem& prob);

CostReport mc_cost(const ValidatedProblem& prob, const ControlLaw& law, const NoisePlan& plan,
                   int threads = 1, bool keep_per_path = false);
CostReport mc_cost(const ValidatedProblem& prob, const ClosedLoopStrategy& strategy,
                   const NoisePlan& plan, int threads = 1, bool keep_per_path = false);

struct Probe {
  std::string name;
  ControlLaw law;
};

/// `count` probe controls: unit constants along each control axis first, then
/// Gaussian piecewise-constant paths (8 pieces) seeded from `seed`.
std::vector<Probe> default_probes(const ValidatedProblem& prob, int count, std::uint64_t seed);

/// 1 + max_k ||P(t_k)||_2 (1 + ||x0||^2).
double problem_scale(const ValidatedProblem& prob, const RiccatiSolution& ride);

/// Euler/quadrature bias band: factor * h * problem_scale.
double discretization_allowance(const ValidatedProblem& prob, const RiccatiSolution& ride,
                                double factor = 10.0);

/// Mean closed-loop cost against V(t0, x0): gap within 3 SE + allowance.
IdentityReport value_match(const ValidatedProblem& prob, const RiccatiSolution& ride,
                           const AdjointSolution& adj, const ClosedLoopStrategy& strategy,
                           const NoisePlan& plan, int threads = 1, double allowance_factor = 10.0);

struct SquaresResult {
  IdentityReport identity;    ///< J(u) - J(closed loop) vs E sum h <Rhat d, d>
  IdentityReport optimality;  ///< shortfall of J(u) - J(closed loop) below 0 vs 3 SE
};

/// Completion-of-squares identity under common random numbers, per probe.
std::vector<SquaresResult> completion_of_squares_check(const ValidatedProblem& prob,
                                                       const RiccatiSolution& ride,
                                                       const ClosedLoopStrategy& strategy,
                                                       const std::vector<Probe>& probes,
                                                       const NoisePlan& plan, int threads = 1,
                                                       double allowance_factor = 10.0);

/// Max over closed-loop paths and grid points of
///   |B'Y + D'Z + sum pi G'K + (S + R Theta) X + R v + rho|
/// with Y, Z, K rebuilt from (P, eta) and the strategy's Theta, v.
double stationarity_residual(const ValidatedProblem& prob, const RiccatiSolution& ride,
                             const AdjointSolution& adj, const ClosedLoopStrategy& strategy,
                             const NoisePlan& plan, int threads = 1);

struct ConvexityResult {
  double min_value = 0.0;  ///< smallest mean quadratic cost over probes
  double std_error = 0.0;  ///< SE of that probe's estimate
  std::string probe;
  std::vector<CostReport> per_probe;

  bool consistent() const { return min_value >= -3.0 * std_error; }
};

/// Quadratic cost of the homogeneous system (zero initial state, no
/// inhomogeneities) under each probe; a negative mean certifies non-convexity.
ConvexityResult convexity_probe(const ValidatedProblem& prob, const std::vector<Probe>& probes,
                                const NoisePlan& plan, int threads = 1);

/// Replays the recorded closed-loop controls as an open-loop control under
/// the same noise; pass iff states and costs agree bit-exactly.
IdentityReport equivalence_check(const ValidatedProblem& prob, const ClosedLoopStrategy& strategy,
                                 const NoisePlan& plan, int threads = 1);

struct VerificationSettings {
  int square_probes = 5;
  int convexity_probes = 20;
  std::uint64_t probe_seed = 0;
  double allowance_factor = 10.0;
  double stationarity_tolerance = 1e-8;  ///< relative to problem_scale
};

struct VerificationRun {
  std::vector<IdentityReport> checks;
  bool all_pass() const;
};

/// Value match, completion of squares with optimality, stationarity,
/// convexity and the open/closed-loop replay.
VerificationRun run_verification(const ValidatedProblem& prob, const RiccatiSolution& ride,
                                 const AdjointSolution& adj, const ClosedLoopStrategy& strategy,
                                 const NoisePlan& plan, const VerificationSettings& settings = {},
                                 int threads = 1);

/// JSON report: {"checks": [{name, lhs, rhs, gap, tolerance, pass}...],
/// "environment": {seed, N, paths}, "pass": bool}.
std::string verification_json(const VerificationRun& run, const NoisePlan& plan, int steps);

}  // namespace jumplq
