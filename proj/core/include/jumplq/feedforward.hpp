#pragma once

#include <vector>

#include "jumplq/riccati.hpp"

namespace jumplq {

/// Solution (eta, zeta, psi) of the adjoint backward equation. With
/// deterministic inhomogeneities the martingale parts zeta and psi vanish;
/// they are kept so the triple matches the general equation.
struct AdjointSolution {
  TimeGrid grid;
  std::vector<Vector> eta;                ///< eta(t_N) == g
  std::vector<Vector> zeta;               ///< identically zero
  std::vector<std::vector<Vector>> psi;   ///< [k][mark], identically zero
  std::vector<Vector> w;                  ///< B'eta + D'P sigma + sum pi G'P f + rho
  std::vector<bool> range_ok;
};

/// Feedback gain and feedforward of the closed-loop optimal strategy,
/// stored at grid points and linearly interpolated in between.
struct ClosedLoopStrategy {
  TimeGrid grid;
  std::vector<Matrix> theta;  ///< m x n
  std::vector<Vector> v;      ///< m

  Matrix theta_at(double t) const;
  Vector v_at(double t) const;
};

/// w = B'eta + D'P sigma + sum_i pi_i G_i'P f_i + rho.
Vector feedforward_source(const Vector& eta, const Matrix& P, const Coefficients& c);

/// d(eta)/dt = -{(A+B Theta)'eta + (C+D Theta)'P sigma + sum pi (F+G Theta)'P f
///               + P b + q - Lcal' Rhat^+ rho},   Theta = -Rhat^+ Lcal.
Vector eta_rhs(const Vector& eta, const Matrix& P, const Coefficients& c);

/// As above at time t. With `gate` set the Riccati gates are checked first.
Vector eta_rhs(const Vector& eta, double t, const Matrix& P, const ValidatedProblem& prob,
               const Tolerances* gate = nullptr);

/// RK4 backward from eta(T) = g, integrated jointly with the RK4 stages of P
/// so the stage values of P match the ones solve_ride used. Checks that w
/// lies in range(Rhat) at every grid point; raises ClosedLoopUnsolvable
/// with Regularity::RangeFeedforward otherwise.
AdjointSolution solve_eta(const ValidatedProblem& prob, const RiccatiSolution& ride,
                          const Tolerances& tol = {});

/// v(t_k) = -Rhat(t_k)^+ w(t_k).
std::vector<Vector> feedforward_v(const AdjointSolution& adj, const RiccatiSolution& ride);

ClosedLoopStrategy make_strategy(const RiccatiSolution& ride, const AdjointSolution& adj);

/// V(t_k, x) split into its three contributions.
struct ValueBreakdown {
  double quadratic = 0.0;  ///< <P x, x>
  double linear = 0.0;     ///< 2 <eta, x>
  double integral = 0.0;   ///< trapezoid of 2<eta,b> + <P sigma,sigma> + sum pi <P f,f> - <Rhat^+ w, w>

  double total() const { return quadratic + linear + integral; }
};

ValueBreakdown value_function(const RiccatiSolution& ride, const AdjointSolution& adj,
                              const ValidatedProblem& prob, int k, const Vector& x);

/// Grid-time overload; throws OutOfHorizon when t is not a grid point.
ValueBreakdown value_function(const RiccatiSolution& ride, const AdjointSolution& adj,
                              const ValidatedProblem& prob, double t, const Vector& x);

}  // namespace jumplq
