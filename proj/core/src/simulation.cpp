#include "jumplq/simulation.hpp"

#include <algorithm>
#include <exception>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include "jumplq/csv.hpp"
#include "jumplq/errors.hpp"

namespace jumplq {

void step_into(Eigen::Ref<Vector> next, const Eigen::Ref<const Vector>& X,
               const Eigen::Ref<const Vector>& u, const Coefficients& c, double h, double dW,
               std::span<const int> dN) {
  next = X + h * c.b + dW * c.sigma;
  next.noalias() += h * (c.A * X);
  next.noalias() += h * (c.B * u);
  if (dW != 0.0) {
    next.noalias() += dW * (c.C * X);
    next.noalias() += dW * (c.D * u);
  }
  for (std::size_t i = 0; i < c.pi.size(); ++i) {
    const double compensated = static_cast<double>(dN[i]) - c.pi[i] * h;
    if (compensated == 0.0) continue;
    next.noalias() += compensated * (c.F[i] * X);
    next.noalias() += compensated * (c.G[i] * u);
    next += compensated * c.f[i];
  }
}

Vector step(const Vector& X, const Vector& u, const Coefficients& c, double h, double dW,
            std::span<const int> dN) {
  Vector next(X.size());
  step_into(next, X, u, c, h, dW, dN);
  return next;
}

Vector step(const Vector& X, const Vector& u, int k, double dW, std::span<const int> dN,
            const ValidatedProblem& prob) {
  return step(X, u, prob.at_index(k), prob.grid().step(), dW, dN);
}

ControlLaw closed_loop_law(ClosedLoopStrategy strategy) {
  auto s = std::make_shared<const ClosedLoopStrategy>(std::move(strategy));
  return [s](int, int k, const Eigen::Ref<const Vector>& X, Eigen::Ref<Vector> u) {
    const auto idx = static_cast<std::size_t>(k);
    u = s->v[idx];
    u.noalias() += s->theta[idx] * X;
  };
}

ControlLaw open_loop_law(std::vector<Vector> controls) {
  auto c = std::make_shared<const std::vector<Vector>>(std::move(controls));
  return [c](int, int k, const Eigen::Ref<const Vector>&, Eigen::Ref<Vector> u) {
    u = c->at(static_cast<std::size_t>(k));
  };
}

ControlLaw open_loop_law(std::vector<std::vector<Vector>> controls) {
  auto c = std::make_shared<const std::vector<std::vector<Vector>>>(std::move(controls));
  return [c](int path, int k, const Eigen::Ref<const Vector>&, Eigen::Ref<Vector> u) {
    u = c->at(static_cast<std::size_t>(path)).at(static_cast<std::size_t>(k));
  };
}

void parallel_for_paths(int paths, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::clamp(threads, 1, std::max(1, paths));

  std::mutex mutex;
  int failed_path = paths;
  std::exception_ptr failure;

  auto worker = [&](int first) {
    for (int p = first; p < paths; p += threads) {
      try {
        body(p);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (p < failed_path) {
          failed_path = p;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  if (failure) std::rethrow_exception(failure);
}

Trajectory simulate_path(const ValidatedProblem& prob, const ControlLaw& law, const NoisePlan& plan,
                         int path) {
  const TimeGrid& grid = prob.grid();
  const int N = grid.steps;
  const int K = prob.jump_count();
  const double h = grid.step();

  Trajectory traj;
  traj.path = path;
  traj.X.resize(prob.n(), N + 1);
  traj.u.resize(prob.m(), N);
  traj.jumps.resize(K, N);
  traj.X.col(0) = prob.spec().x0;

  Vector X = prob.spec().x0;
  Vector next(prob.n());
  Vector u(prob.m());
  std::vector<int> dN(static_cast<std::size_t>(K));
  for (int k = 0; k < N; ++k) {
    const Coefficients& c = prob.at_index(k);
    law(path, k, X, u);
    const double dW = plan.brownian(path, k, h);
    for (int i = 0; i < K; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      dN[idx] = plan.jump_count(path, k, i, c.pi[idx] * h);
      traj.jumps(i, k) = dN[idx];
    }
    step_into(next, X, u, c, h, dW, dN);
    if (!next.allFinite() || !u.allFinite()) {
      throw SimulationFailure(path, k,
                              "non-finite state on path " + std::to_string(path) + " at step " +
                                  std::to_string(k));
    }
    traj.u.col(k) = u;
    traj.X.col(k + 1) = next;
    X.swap(next);
  }
  return traj;
}

std::vector<Trajectory> simulate(const ValidatedProblem& prob, const ControlLaw& law,
                                 const NoisePlan& plan, int threads) {
  std::vector<Trajectory> batch(static_cast<std::size_t>(plan.paths));
  parallel_for_paths(plan.paths, threads, [&](int p) {
    batch[static_cast<std::size_t>(p)] = simulate_path(prob, law, plan, p);
  });
  return batch;
}

std::vector<Trajectory> simulate_closed_loop(const ValidatedProblem& prob,
                                             const ClosedLoopStrategy& strategy,
                                             const NoisePlan& plan, int threads) {
  return simulate(prob, closed_loop_law(strategy), plan, threads);
}

std::vector<Trajectory> simulate_open_loop(const ValidatedProblem& prob,
                                           std::vector<Vector> controls, const NoisePlan& plan,
                                           int threads) {
  return simulate(prob, open_loop_law(std::move(controls)), plan, threads);
}

std::vector<Trajectory> simulate_open_loop(const ValidatedProblem& prob,
                                           std::vector<std::vector<Vector>> controls,
                                           const NoisePlan& plan, int threads) {
  return simulate(prob, open_loop_law(std::move(controls)), plan, threads);
}

void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> batch,
                            const TimeGrid& grid, int n, int m, int marks) {
  out << "path,k,t";
  for (int i = 0; i < n; ++i) out << ",X_" << i;
  for (int i = 0; i < m; ++i) out << ",u_" << i;
  for (int i = 1; i <= marks; ++i) out << ",dN_" << i;
  out << '\n';
  for (const auto& traj : batch) {
    const auto N = static_cast<int>(traj.X.cols()) - 1;
    for (int k = 0; k <= N; ++k) {
      out << traj.path << ',' << k << ',' << format_double(grid.time(k));
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(traj.X(i, k));
      for (Eigen::Index i = 0; i < m; ++i) {
        out << ',';
        if (k < N) out << format_double(traj.u(i, k));
      }
      for (int i = 0; i < marks; ++i) {
        out << ',';
        if (k < N) out << traj.jumps(i, k);
      }
      out << '\n';
    }
  }
}

}  // namespace jumplq
