#include "jumplq/riccati.hpp"

#include <cmath>

#include "jumplq/errors.hpp"

namespace jumplq {
namespace {

// One classic RK4 step of dY/dt = rhs(Y, stage) backward from t_{k+1} to t_k.
// Stage 0 is t_{k+1}, stage 1 the midpoint, stage 2 t_k.
template <class State, class Rhs>
State rk4_backward(const State& y, double h, Rhs&& rhs) {
  const State k1 = rhs(y, 0);
  const State k2 = rhs(State(y - 0.5 * h * k1), 1);
  const State k3 = rhs(State(y - 0.5 * h * k2), 1);
  const State k4 = rhs(State(y - h * k3), 2);
  return y - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_gates(const GainOperators& ops, double t, const Tolerances& tol) {
  if (!is_psd(ops.Rhat, tol.psd)) throw RegularityViolation(t, Regularity::Psd);
  if (!range_contains(ops.Rhat, ops.Lcal, tol.range)) throw RegularityViolation(t, Regularity::Range);
}

}  // namespace

GainOperators assemble_gain_ops(const Matrix& P, const Coefficients& c) {
  Matrix Rhat = c.R + c.D.transpose() * P * c.D;
  Matrix Lcal = c.B.transpose() * P + c.D.transpose() * P * c.C + c.S;
  for (std::size_t i = 0; i < c.pi.size(); ++i) {
    const Matrix GtP = c.G[i].transpose() * P;
    Rhat.noalias() += c.pi[i] * GtP * c.G[i];
    Lcal.noalias() += c.pi[i] * GtP * c.F[i];
  }
  return {symmetrize(Rhat), std::move(Lcal)};
}

GainOperators assemble_gain_ops(const Matrix& P, double t, const ValidatedProblem& prob) {
  return assemble_gain_ops(P, prob.at(t));
}

Matrix riccati_rhs(const Matrix& P, const Coefficients& c) {
  const GainOperators ops = assemble_gain_ops(P, c);
  Matrix drift = P * c.A + c.A.transpose() * P + c.C.transpose() * P * c.C + c.Q;
  for (std::size_t i = 0; i < c.pi.size(); ++i) {
    drift.noalias() += c.pi[i] * c.F[i].transpose() * P * c.F[i];
  }
  drift.noalias() -= ops.Lcal.transpose() * (pinv(ops.Rhat) * ops.Lcal);
  return -symmetrize(drift);
}

Matrix riccati_rhs(const Matrix& P, double t, const ValidatedProblem& prob, const Tolerances* gate) {
  const Coefficients c = prob.at(t);
  if (gate != nullptr) check_gates(assemble_gain_ops(P, c), t, *gate);
  return riccati_rhs(P, c);
}

RiccatiSolution solve_ride(const ValidatedProblem& prob, const Tolerances& tol) {
  const TimeGrid& grid = prob.grid();
  const int N = grid.steps;
  const double h = grid.step();

  RiccatiSolution sol;
  sol.grid = grid;
  sol.P.resize(static_cast<std::size_t>(N) + 1);
  sol.ops.resize(sol.P.size());
  sol.certificates.resize(sol.P.size());

  auto certify = [&](int k) {
    const auto idx = static_cast<std::size_t>(k);
    sol.ops[idx] = assemble_gain_ops(sol.P[idx], prob.at_index(k));
    const auto& ops = sol.ops[idx];
    auto& cert = sol.certificates[idx];
    cert.psd_ok = is_psd(ops.Rhat, tol.psd);
    if (!cert.psd_ok) throw ClosedLoopUnsolvable(grid.time(k), Regularity::Psd);
    cert.range_ok = range_contains(ops.Rhat, ops.Lcal, tol.range);
    if (!cert.range_ok) throw ClosedLoopUnsolvable(grid.time(k), Regularity::Range);
    cert.theta_norm = (pinv(ops.Rhat) * ops.Lcal).norm();
  };

  sol.P[static_cast<std::size_t>(N)] = prob.spec().H;
  certify(N);
  for (int k = N - 1; k >= 0; --k) {
    const Coefficients mid = prob.at(grid.time(k) + 0.5 * h);
    const Coefficients* stages[3] = {&prob.at_index(k + 1), &mid, &prob.at_index(k)};
    Matrix next = rk4_backward(sol.P[static_cast<std::size_t>(k) + 1], h,
                               [&](const Matrix& P, int s) { return riccati_rhs(P, *stages[s]); });
    if (!next.allFinite()) {
      throw NumericalFailure("Riccati solution blew up at t=" + std::to_string(grid.time(k)));
    }
    sol.P[static_cast<std::size_t>(k)] = symmetrize(next);
    certify(k);
  }

  double sum = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double w = (k == 0 || k == N) ? 0.5 : 1.0;
    const double norm = sol.certificates[static_cast<std::size_t>(k)].theta_norm;
    sum += w * h * norm * norm;
  }
  sol.theta_l2_norm = std::sqrt(sum);
  if (!std::isfinite(sol.theta_l2_norm)) throw NumericalFailure("gain is not square integrable");
  return sol;
}

std::vector<Matrix> feedback_gain(const RiccatiSolution& sol) {
  std::vector<Matrix> theta;
  theta.reserve(sol.ops.size());
  for (const auto& ops : sol.ops) theta.push_back(-pinv(ops.Rhat) * ops.Lcal);
  return theta;
}

namespace {

Matrix lyapunov_rhs(const Matrix& P, const Coefficients& c, const Matrix& theta) {
  const Matrix Acl = c.A + c.B * theta;
  const Matrix Ccl = c.C + c.D * theta;
  const Matrix St = c.S.transpose() * theta;
  Matrix drift = P * Acl + Acl.transpose() * P + Ccl.transpose() * P * Ccl + c.Q + St +
                 St.transpose() + theta.transpose() * c.R * theta;
  for (std::size_t i = 0; i < c.pi.size(); ++i) {
    const Matrix Fcl = c.F[i] + c.G[i] * theta;
    drift.noalias() += c.pi[i] * Fcl.transpose() * P * Fcl;
  }
  return -symmetrize(drift);
}

}  // namespace

std::vector<Matrix> solve_lyapunov(const ValidatedProblem& prob, std::span<const Matrix> theta) {
  const TimeGrid& grid = prob.grid();
  const int N = grid.steps;
  const double h = grid.step();
  if (static_cast<int>(theta.size()) != N + 1) {
    throw std::invalid_argument("solve_lyapunov: gain path must have steps+1 entries");
  }

  std::vector<Matrix> P(static_cast<std::size_t>(N) + 1);
  P[static_cast<std::size_t>(N)] = prob.spec().H;
  for (int k = N - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    const Coefficients mid = prob.at(grid.time(k) + 0.5 * h);
    const Matrix theta_mid = 0.5 * (theta[idx] + theta[idx + 1]);
    const Coefficients* stages[3] = {&prob.at_index(k + 1), &mid, &prob.at_index(k)};
    const Matrix* gains[3] = {&theta[idx + 1], &theta_mid, &theta[idx]};
    Matrix next = rk4_backward(P[idx + 1], h, [&](const Matrix& X, int s) {
      return lyapunov_rhs(X, *stages[s], *gains[s]);
    });
    if (!next.allFinite()) {
      throw NumericalFailure("Lyapunov solution blew up at t=" + std::to_string(grid.time(k)));
    }
    P[idx] = symmetrize(next);
  }
  return P;
}

}  // namespace jumplq
