#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "jumplq/linalg.hpp"

namespace jumplq {

/// Uniform grid t_k = t0 + k h, k = 0..steps, with t_steps == T exactly.
struct TimeGrid {
  double t0 = 0.0;
  double T = 1.0;
  int steps = 1;

  double step() const { return (T - t0) / steps; }
  double time(int k) const { return k == steps ? T : t0 + k * step(); }

  /// Index of the grid point within 1e-9 h of t; throws OutOfHorizon otherwise.
  int index_of(double t) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// A coefficient that is either constant in time or sampled at every grid
/// point and linearly interpolated in between.
class CoefficientPath {
 public:
  CoefficientPath() = default;

  static CoefficientPath constant(Matrix value);
  static CoefficientPath sampled(std::vector<Matrix> samples);

  bool is_constant() const { return std::holds_alternative<Matrix>(data_); }
  const Matrix& constant_value() const { return std::get<Matrix>(data_); }
  const std::vector<Matrix>& samples() const { return std::get<std::vector<Matrix>>(data_); }

  Eigen::Index rows() const;
  Eigen::Index cols() const;

  /// Exact stored value at grid index k.
  Matrix at_index(int k) const;

  /// Value at time t; exact at grid points. Throws OutOfHorizon.
  Matrix at(const TimeGrid& grid, double t) const;

  friend bool operator==(const CoefficientPath& a, const CoefficientPath& b);

 private:
  std::variant<Matrix, std::vector<Matrix>> data_{Matrix()};
};

Matrix eval_coeff(const CoefficientPath& path, const TimeGrid& grid, double t);

/// One atom of the discretized mark space. `intensity` has units 1/time.
struct Mark {
  std::string id;
  double intensity = 0.0;

  friend bool operator==(const Mark&, const Mark&) = default;
};

/// Full data of the controlled jump-diffusion and its quadratic cost.
///
/// Vector-valued paths (b, sigma, f, q, rho) are stored as single-column
/// matrices. Per-mark paths (F, G, f) are indexed like `marks`.
struct ProblemSpec {
  int n = 1;
  int m = 1;
  TimeGrid grid;
  std::vector<Mark> marks;

  CoefficientPath A, B, C, D;
  std::vector<CoefficientPath> F, G;
  CoefficientPath b, sigma;
  std::vector<CoefficientPath> f;

  CoefficientPath Q, S, R, q, rho;
  Matrix H;
  Vector g;

  Vector x0;

  int jump_count() const { return static_cast<int>(marks.size()); }

  friend bool operator==(const ProblemSpec& a, const ProblemSpec& b);
};

/// All coefficients frozen at one time instant.
struct Coefficients {
  Matrix A, B, C, D, Q, S, R;
  Vector b, sigma, q, rho;
  std::vector<Matrix> F, G;
  std::vector<Vector> f;
  std::vector<double> pi;
};

struct ValidationIssue {
  std::string field;
  int grid_index = -1;
  int mark_index = -1;
  std::string message;

  std::string to_string() const;
};

class ValidationFailed : public std::runtime_error {
 public:
  explicit ValidationFailed(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// Every violated constraint of `spec`; empty when the spec is valid.
std::vector<ValidationIssue> check(const ProblemSpec& spec);

/// An immutable, checked problem with coefficients tabulated on the grid.
/// Copies share the same underlying data.
class ValidatedProblem {
 public:
  const ProblemSpec& spec() const { return impl_->spec; }
  int n() const { return impl_->spec.n; }
  int m() const { return impl_->spec.m; }
  int jump_count() const { return impl_->spec.jump_count(); }
  const TimeGrid& grid() const { return impl_->spec.grid; }

  const Coefficients& at_index(int k) const { return impl_->table.at(k); }
  Coefficients at(double t) const;

 private:
  struct Impl {
    ProblemSpec spec;
    std::vector<Coefficients> table;
  };
  explicit ValidatedProblem(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  friend ValidatedProblem validate(ProblemSpec spec);

  std::shared_ptr<const Impl> impl_;
};

/// Checks `spec` and tabulates it. Throws ValidationFailed listing every issue.
ValidatedProblem validate(ProblemSpec spec);

/// Same data on a grid with `steps` intervals. Sampled paths cannot be
/// regridded and cause a ValidationFailed.
ValidatedProblem with_steps(const ValidatedProblem& prob, int steps);

/// Copy with b, sigma, f, q, rho, g and x0 set to zero.
ValidatedProblem homogeneous_part(const ValidatedProblem& prob);

/// A spec of the given dimensions with every coefficient constant zero.
ProblemSpec zero_spec(int n, int m, int marks, TimeGrid grid);

}  // namespace jumplq
