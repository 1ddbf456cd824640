#include "jumplq/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "jumplq/errors.hpp"

namespace jumplq {

Matrix pinv(const Matrix& M, std::optional<double> sv_cutoff) {
  if (M.size() == 0) return Matrix::Zero(M.cols(), M.rows());
  if (!all_finite(M)) {
    throw NumericalFailure("pinv: non-finite entries in " + std::to_string(M.rows()) +
                           "x" + std::to_string(M.cols()) + " matrix");
  }
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalFailure("pinv: SVD did not converge for " + std::to_string(M.rows()) +
                           "x" + std::to_string(M.cols()) + " matrix");
  }
  const Vector& s = svd.singularValues();
  const double largest = s.size() > 0 ? s(0) : 0.0;
  const double cutoff =
      sv_cutoff.value_or(static_cast<double>(std::max(M.rows(), M.cols())) *
                         std::numeric_limits<double>::epsilon() * largest);

  Vector s_inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) s_inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

bool is_psd(const Matrix& M, double tol) {
  if (M.size() == 0) return true;
  if (!all_finite(M)) throw NumericalFailure("is_psd: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure("is_psd: eigendecomposition failed");
  }
  const Vector& lambda = eig.eigenvalues();
  const double norm2 = lambda.cwiseAbs().maxCoeff();
  return lambda.minCoeff() >= -std::max(tol, kToleranceFloor) * (1.0 + norm2);
}

bool range_contains(const Matrix& M, const Matrix& N, double tol) {
  if (N.size() == 0) return true;
  const Matrix residual = N - M * (pinv(M) * N);
  return residual.norm() <= std::max(tol, kToleranceFloor) * (1.0 + N.norm());
}

double psd_quadform_via_pinv(const Matrix& M, const Vector& w) {
  if (w.size() == 0) return 0.0;
  return (pinv(M) * w).dot(w);
}

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

bool is_symmetric(const Matrix& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  if (M.size() == 0) return true;
  const double bound = rel_tol * (1.0 + M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= bound;
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

}  // namespace jumplq
