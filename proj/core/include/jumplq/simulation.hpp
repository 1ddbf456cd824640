#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "jumplq/feedforward.hpp"
#include "jumplq/noise.hpp"
#include "jumplq/problem.hpp"

namespace jumplq {

struct Trajectory {
  int path = 0;
  Matrix X;              ///< n x (N+1); column k is X(t_k)
  Matrix u;              ///< m x N; column k acts on [t_k, t_{k+1})
  Eigen::MatrixXi jumps; ///< K x N jump counts per mark and step
};

/// One Euler step of the controlled jump-diffusion with coefficients frozen
/// at the left endpoint:
///   X + (A X + B u + b) h + (C X + D u + sigma) dW
///     + sum_i (F_i X + G_i u + f_i)(dN_i - pi_i h)
Vector step(const Vector& X, const Vector& u, const Coefficients& c, double h, double dW,
            std::span<const int> dN);
/// Allocation-free form writing X_{k+1} into `next` (must not alias X).
void step_into(Eigen::Ref<Vector> next, const Eigen::Ref<const Vector>& X,
               const Eigen::Ref<const Vector>& u, const Coefficients& c, double h, double dW,
               std::span<const int> dN);
Vector step(const Vector& X, const Vector& u, int k, double dW, std::span<const int> dN,
            const ValidatedProblem& prob);

/// Writes the control for step k into `u` (already sized m) from the state
/// at the step's left endpoint.
using ControlLaw =
    std::function<void(int path, int k, const Eigen::Ref<const Vector>& X, Eigen::Ref<Vector> u)>;

/// u_k = Theta(t_k) X_k + v(t_k).
ControlLaw closed_loop_law(ClosedLoopStrategy strategy);
/// Same deterministic control sequence for every path (N entries).
ControlLaw open_loop_law(std::vector<Vector> controls);
/// Per-path control sequences, indexed [path][step].
ControlLaw open_loop_law(std::vector<std::vector<Vector>> controls);

/// Runs body(path) for every path in [0, paths) on `threads` workers
/// (0 = hardware concurrency). If any call throws, the exception from the
/// lowest path index is rethrown after all workers finish.
void parallel_for_paths(int paths, int threads, const std::function<void(int)>& body);

/// Simulates one path from the problem's initial state. The noise draws
/// depend only on (plan.master_seed, path, step, channel).
Trajectory simulate_path(const ValidatedProblem& prob, const ControlLaw& law, const NoisePlan& plan,
                         int path);

std::vector<Trajectory> simulate(const ValidatedProblem& prob, const ControlLaw& law,
                                 const NoisePlan& plan, int threads = 1);

std::vector<Trajectory> simulate_closed_loop(const ValidatedProblem& prob,
                                             const ClosedLoopStrategy& strategy,
                                             const NoisePlan& plan, int threads = 1);
std::vector<Trajectory> simulate_open_loop(const ValidatedProblem& prob,
                                           std::vector<Vector> controls, const NoisePlan& plan,
                                           int threads = 1);
std::vector<Trajectory> simulate_open_loop(const ValidatedProblem& prob,
                                           std::vector<std::vector<Vector>> controls,
                                           const NoisePlan& plan, int threads = 1);

/// CSV with header path,k,t,X_0..X_{n-1},u_0..u_{m-1},dN_1..dN_K; u and dN
/// are empty on each path's terminal row.
void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> batch,
                            const TimeGrid& grid, int n, int m, int marks);

}  // namespace jumplq
