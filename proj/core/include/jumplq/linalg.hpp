#pragma once

#include <Eigen/Dense>
#include <optional>

namespace jumplq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerances never go below this absolute floor.
inline constexpr double kToleranceFloor = 1e-14;

/// Moore-Penrose pseudo-inverse through a thin SVD.
///
/// Singular values at or below the cutoff are treated as zero. When no cutoff
/// is given the relative rule max(rows, cols) * eps * sigma_max is used.
/// Throws NumericalFailure on non-finite input or a failed SVD.
Matrix pinv(const Matrix& M, std::optional<double> sv_cutoff = std::nullopt);

/// True iff the smallest eigenvalue of the symmetric matrix M is at least
/// -tol * (1 + ||M||_2).
bool is_psd(const Matrix& M, double tol);

/// True iff every column of N lies in the column space of M, i.e.
/// ||(I - M M^+) N||_F <= tol * (1 + ||N||_F).
bool range_contains(const Matrix& M, const Matrix& N, double tol);

/// <M^+ w, w>. For w outside range(M) this is the quadratic form of the
/// projection of w onto range(M).
double psd_quadform_via_pinv(const Matrix& M, const Vector& w);

/// (M + M^T) / 2.
Matrix symmetrize(const Matrix& M);

/// |M(i,j) - M(j,i)| <= rel_tol * (1 + max|M|) for all i, j.
bool is_symmetric(const Matrix& M, double rel_tol = 1e-12);

bool all_finite(const Matrix& M);

/// Largest singular value.
double spectral_norm(const Matrix& M);

}  // namespace jumplq
