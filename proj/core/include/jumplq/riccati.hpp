#pragma once

#include <span>
#include <vector>

#include "jumplq/problem.hpp"

namespace jumplq {

/// Bands applied to the exact solvability conditions.
struct Tolerances {
  double psd = 1e-10;    ///< relative to 1 + ||Rhat||_2
  double range = 1e-9;   ///< relative to 1 + ||Lcal||_F (or ||w||)
};

/// Rhat = R + D'PD + sum_i pi_i G_i'PG_i   (m x m, symmetric)
/// Lcal = B'P + D'PC + sum_i pi_i G_i'PF_i + S   (m x n)
struct GainOperators {
  Matrix Rhat;
  Matrix Lcal;
};

GainOperators assemble_gain_ops(const Matrix& P, const Coefficients& c);
GainOperators assemble_gain_ops(const Matrix& P, double t, const ValidatedProblem& prob);

/// dP/dt of the Riccati integro-differential equation:
///   -[PA + A'P + C'PC + sum pi F'PF + Q - Lcal' Rhat^+ Lcal], symmetrized.
Matrix riccati_rhs(const Matrix& P, const Coefficients& c);

/// As above at time t. When `gate` is set, the PSD and range conditions are
/// checked first and a RegularityViolation is thrown if either fails.
Matrix riccati_rhs(const Matrix& P, double t, const ValidatedProblem& prob,
                   const Tolerances* gate = nullptr);

/// Gate outcome at one grid point.
struct GridCertificate {
  bool psd_ok = false;
  bool range_ok = false;
  double theta_norm = 0.0;  ///< ||Rhat^+ Lcal||_F at this grid point
};

struct RiccatiSolution {
  TimeGrid grid;
  std::vector<Matrix> P;                ///< P(t_k), k = 0..N; P.back() == H
  std::vector<GainOperators> ops;       ///< Rhat, Lcal at each grid point
  std::vector<GridCertificate> certificates;
  double theta_l2_norm = 0.0;           ///< trapezoid L2(t0,T) norm of Rhat^+ Lcal
};

/// Integrates the Riccati equation backward from P(T) = H with classic RK4.
///
/// P is symmetrized after every step. Both gates are checked at every grid
/// point (not at interior stages); the first failure, scanning backward from
/// T, raises ClosedLoopUnsolvable. Non-finite P raises NumericalFailure.
RiccatiSolution solve_ride(const ValidatedProblem& prob, const Tolerances& tol = {});

/// Theta(t_k) = -Rhat(t_k)^+ Lcal(t_k), the minimum-norm optimal gain.
std::vector<Matrix> feedback_gain(const RiccatiSolution& sol);

/// Cost matrix of the fixed feedback Theta (given on the grid, linearly
/// interpolated at half steps):
///   0 = dP/dt + P(A+BT) + (A+BT)'P + (C+DT)'P(C+DT) + Q + S'T + T'S + T'RT
///       + sum pi (F+GT)'P(F+GT),   P(T) = H.
std::vector<Matrix> solve_lyapunov(const ValidatedProblem& prob, std::span<const Matrix> theta);

}  // namespace jumplq
