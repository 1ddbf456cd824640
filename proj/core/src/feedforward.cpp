#include "jumplq/feedforward.hpp"

#include <algorithm>
#include <cmath>

#include "jumplq/errors.hpp"

namespace jumplq {
namespace {

template <class T>
T interpolate(const TimeGrid& grid, const std::vector<T>& values, double t) {
  const double h = grid.step();
  if (!(t >= grid.t0 - 1e-9 * h && t <= grid.T + 1e-9 * h)) throw OutOfHorizon(t);
  const double s = std::clamp((t - grid.t0) / h, 0.0, static_cast<double>(grid.steps));
  const double nearest = std::round(s);
  if (std::abs(s - nearest) <= 1e-9) return values.at(static_cast<std::size_t>(nearest));
  const auto k = static_cast<std::size_t>(std::floor(s));
  const double w = s - static_cast<double>(k);
  return (1.0 - w) * values.at(k) + w * values.at(k + 1);
}

}  // namespace

Matrix ClosedLoopStrategy::theta_at(double t) const { return interpolate(grid, theta, t); }
Vector ClosedLoopStrategy::v_at(double t) const { return interpolate(grid, v, t); }

Vector feedforward_source(const Vector& eta, const Matrix& P, const Coefficients& c) {
  Vector w = c.B.transpose() * eta + c.D.transpose() * (P * c.sigma) + c.rho;
  for (std::size_t i = 0; i < c.pi.size(); ++i) {
    w.noalias() += c.pi[i] * c.G[i].transpose() * (P * c.f[i]);
  }
  return w;
}

Vector eta_rhs(const Vector& eta, const Matrix& P, const Coefficients& c) {
  const GainOperators ops = assemble_gain_ops(P, c);
  const Matrix Rpinv = pinv(ops.Rhat);
  const Matrix theta = -Rpinv * ops.Lcal;

  const Vector Psigma = P * c.sigma;
  Vector drift = (c.A + c.B * theta).transpose() * eta + (c.C + c.D * theta).transpose() * Psigma +
                 P * c.b + c.q - ops.Lcal.transpose() * (Rpinv * c.rho);
  for (std::size_t i = 0; i < c.pi.size(); ++i) {
    drift.noalias() += c.pi[i] * (c.F[i] + c.G[i] * theta).transpose() * (P * c.f[i]);
  }
  return -drift;
}

Vector eta_rhs(const Vector& eta, double t, const Matrix& P, const ValidatedProblem& prob,
               const Tolerances* gate) {
  const Coefficients c = prob.at(t);
  if (gate != nullptr) {
    const GainOperators ops = assemble_gain_ops(P, c);
    if (!is_psd(ops.Rhat, gate->psd)) throw RegularityViolation(t, Regularity::Psd);
    if (!range_contains(ops.Rhat, ops.Lcal, gate->range)) {
      throw RegularityViolation(t, Regularity::Range);
    }
  }
  return eta_rhs(eta, P, c);
}

AdjointSolution solve_eta(const ValidatedProblem& prob, const RiccatiSolution& ride,
                          const Tolerances& tol) {
  const TimeGrid& grid = prob.grid();
  const int N = grid.steps;
  const double h = grid.step();
  const auto size = static_cast<std::size_t>(N) + 1;
  const Eigen::Index n = prob.n();

  AdjointSolution adj;
  adj.grid = grid;
  adj.eta.resize(size);
  adj.w.resize(size);
  adj.range_ok.assign(size, false);
  adj.zeta.assign(size, Vector::Zero(n));
  adj.psi.assign(size, std::vector<Vector>(static_cast<std::size_t>(prob.jump_count()),
                                           Vector::Zero(n)));

  auto certify = [&](int k) {
    const auto idx = static_cast<std::size_t>(k);
    adj.w[idx] = feedforward_source(adj.eta[idx], ride.P[idx], prob.at_index(k));
    adj.range_ok[idx] = range_contains(ride.ops[idx].Rhat, adj.w[idx], tol.range);
    if (!adj.range_ok[idx]) throw ClosedLoopUnsolvable(grid.time(k), Regularity::RangeFeedforward);
  };

  adj.eta[static_cast<std::size_t>(N)] = prob.spec().g;
  certify(N);
  for (int k = N - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    const Coefficients mid = prob.at(grid.time(k) + 0.5 * h);
    const Coefficients& right = prob.at_index(k + 1);
    const Coefficients& left = prob.at_index(k);

    // Coupled RK4 on (P, eta); P's stages reproduce solve_ride's step.
    const Matrix& P1 = ride.P[idx + 1];
    const Vector& e1 = adj.eta[idx + 1];
    const Matrix kp1 = riccati_rhs(P1, right);
    const Vector ke1 = eta_rhs(e1, P1, right);
    const Matrix P2 = P1 - 0.5 * h * kp1;
    const Vector e2 = e1 - 0.5 * h * ke1;
    const Matrix kp2 = riccati_rhs(P2, mid);
    const Vector ke2 = eta_rhs(e2, P2, mid);
    const Matrix P3 = P1 - 0.5 * h * kp2;
    const Vector e3 = e1 - 0.5 * h * ke2;
    const Matrix kp3 = riccati_rhs(P3, mid);
    const Vector ke3 = eta_rhs(e3, P3, mid);
    const Matrix P4 = P1 - h * kp3;
    const Vector e4 = e1 - h * ke3;
    const Vector ke4 = eta_rhs(e4, P4, left);

    Vector next = e1 - (h / 6.0) * (ke1 + 2.0 * ke2 + 2.0 * ke3 + ke4);
    if (!next.allFinite()) {
      throw NumericalFailure("adjoint solution blew up at t=" + std::to_string(grid.time(k)));
    }
    adj.eta[idx] = std::move(next);
    certify(k);
  }
  return adj;
}

std::vector<Vector> feedforward_v(const AdjointSolution& adj, const RiccatiSolution& ride) {
  std::vector<Vector> v;
  v.reserve(adj.w.size());
  for (std::size_t k = 0; k < adj.w.size(); ++k) v.push_back(-pinv(ride.ops[k].Rhat) * adj.w[k]);
  return v;
}

ClosedLoopStrategy make_strategy(const RiccatiSolution& ride, const AdjointSolution& adj) {
  return {ride.grid, feedback_gain(ride), feedforward_v(adj, ride)};
}

ValueBreakdown value_function(const RiccatiSolution& ride, const AdjointSolution& adj,
                              const ValidatedProblem& prob, int k, const Vector& x) {
  const TimeGrid& grid = prob.grid();
  if (k < 0 || k > grid.steps) throw OutOfHorizon(grid.t0 + k * grid.step());
  const auto idx = static_cast<std::size_t>(k);

  auto integrand = [&](int j) {
    const auto jdx = static_cast<std::size_t>(j);
    const Coefficients& c = prob.at_index(j);
    const Matrix& P = ride.P[jdx];
    double value = 2.0 * adj.eta[jdx].dot(c.b) + 2.0 * adj.zeta[jdx].dot(c.sigma) +
                   (P * c.sigma).dot(c.sigma);
    for (std::size_t i = 0; i < c.pi.size(); ++i) {
      value += c.pi[i] * (2.0 * adj.psi[jdx][i].dot(c.f[i]) + (P * c.f[i]).dot(c.f[i]));
    }
    return value - psd_quadform_via_pinv(ride.ops[jdx].Rhat, adj.w[jdx]);
  };

  ValueBreakdown v;
  v.quadratic = (ride.P[idx] * x).dot(x);
  v.linear = 2.0 * adj.eta[idx].dot(x);
  const double h = grid.step();
  double previous = integrand(k);
  for (int j = k; j < grid.steps; ++j) {
    const double current = integrand(j + 1);
    v.integral += 0.5 * h * (previous + current);
    previous = current;
  }
  return v;
}

ValueBreakdown value_function(const RiccatiSolution& ride, const AdjointSolution& adj,
                              const ValidatedProblem& prob, double t, const Vector& x) {
  return value_function(ride, adj, prob, prob.grid().index_of(t), x);
}

}  // namespace jumplq
