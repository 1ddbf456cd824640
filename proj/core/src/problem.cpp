#include "jumplq/problem.hpp"

#include <cmath>
#include <cstring>
#include <tuple>
#include <sstream>

#include "jumplq/errors.hpp"

namespace jumplq {
namespace {

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a.data()[i], &b.data()[i], sizeof(double)) != 0) return false;
  }
  return true;
}

bool bitwise_equal(const std::vector<CoefficientPath>& a, const std::vector<CoefficientPath>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

// Grid times within this fraction of h snap to the grid point.
constexpr double kSnap = 1e-9;

}  // namespace

int TimeGrid::index_of(double t) const {
  const double s = (t - t0) / step();
  const double k = std::round(s);
  if (std::abs(s - k) > kSnap || k < 0 || k > steps) throw OutOfHorizon(t);
  return static_cast<int>(k);
}

CoefficientPath CoefficientPath::constant(Matrix value) {
  CoefficientPath p;
  p.data_ = std::move(value);
  return p;
}

CoefficientPath CoefficientPath::sampled(std::vector<Matrix> samples) {
  CoefficientPath p;
  p.data_ = std::move(samples);
  return p;
}

Eigen::Index CoefficientPath::rows() const {
  if (is_constant()) return constant_value().rows();
  return samples().empty() ? 0 : samples().front().rows();
}

Eigen::Index CoefficientPath::cols() const {
  if (is_constant()) return constant_value().cols();
  return samples().empty() ? 0 : samples().front().cols();
}

Matrix CoefficientPath::at_index(int k) const {
  if (is_constant()) return constant_value();
  return samples().at(static_cast<std::size_t>(k));
}

Matrix CoefficientPath::at(const TimeGrid& grid, double t) const {
  const double h = grid.step();
  if (!(t >= grid.t0 - kSnap * h && t <= grid.T + kSnap * h)) throw OutOfHorizon(t);
  if (is_constant()) return constant_value();

  const auto& v = samples();
  const double s = (t - grid.t0) / h;
  const double nearest = std::round(s);
  if (std::abs(s - nearest) <= kSnap) return v.at(static_cast<std::size_t>(nearest));
  const auto k = static_cast<std::size_t>(std::floor(s));
  const double w = s - static_cast<double>(k);
  return (1.0 - w) * v.at(k) + w * v.at(k + 1);
}

bool operator==(const CoefficientPath& a, const CoefficientPath& b) {
  if (a.is_constant() != b.is_constant()) return false;
  if (a.is_constant()) return bitwise_equal(a.constant_value(), b.constant_value());
  const auto& sa = a.samples();
  const auto& sb = b.samples();
  if (sa.size() != sb.size()) return false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (!bitwise_equal(sa[i], sb[i])) return false;
  }
  return true;
}

Matrix eval_coeff(const CoefficientPath& path, const TimeGrid& grid, double t) {
  return path.at(grid, t);
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  return a.n == b.n && a.m == b.m && a.grid == b.grid && a.marks == b.marks &&
         a.A == b.A && a.B == b.B && a.C == b.C && a.D == b.D &&
         bitwise_equal(a.F, b.F) && bitwise_equal(a.G, b.G) && a.b == b.b &&
         a.sigma == b.sigma && bitwise_equal(a.f, b.f) && a.Q == b.Q && a.S == b.S &&
         a.R == b.R && a.q == b.q && a.rho == b.rho && bitwise_equal(a.H, b.H) &&
         bitwise_equal(a.g, b.g) && bitwise_equal(a.x0, b.x0);
}

std::string ValidationIssue::to_string() const {
  std::ostringstream os;
  os << field;
  if (mark_index >= 0) os << "[mark " << mark_index << "]";
  os << ": " << message;
  if (grid_index >= 0) os << " at k=" << grid_index;
  return os.str();
}

namespace {

std::string summarize(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << issues.size() << " validation issue(s)";
  for (const auto& issue : issues) os << "\n  " << issue.to_string();
  return os.str();
}

class Checker {
 public:
  explicit Checker(const ProblemSpec& spec) : spec_(spec) {}

  void path(const std::string& field, const CoefficientPath& p, Eigen::Index rows,
            Eigen::Index cols, bool symmetric = false, int mark = -1) {
    if (p.is_constant()) {
      // A constant path holds at every grid point; the first one is k=0.
      matrix(field, p.constant_value(), rows, cols, symmetric, 0, mark);
      return;
    }
    const auto& s = p.samples();
    if (static_cast<int>(s.size()) != spec_.grid.steps + 1) {
      add(field, -1, mark,
          "expected " + std::to_string(spec_.grid.steps + 1) + " samples, got " +
              std::to_string(s.size()));
      return;
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
      matrix(field, s[k], rows, cols, symmetric, static_cast<int>(k), mark);
    }
  }

  void matrix(const std::string& field, const Matrix& M, Eigen::Index rows, Eigen::Index cols,
              bool symmetric, int k = -1, int mark = -1) {
    if (M.rows() != rows || M.cols() != cols) {
      add(field, k, mark,
          "dimension mismatch: expected " + std::to_string(rows) + "x" + std::to_string(cols) +
              ", got " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
      return;
    }
    if (!all_finite(M)) {
      add(field, k, mark, "non-finite entry");
      return;
    }
    if (symmetric && !is_symmetric(M)) add(field, k, mark, field + " not symmetric");
  }

  void add(const std::string& field, int k, int mark, std::string message) {
    issues_.push_back({field, k, mark, std::move(message)});
  }

  std::vector<ValidationIssue> take() {
    std::vector<ValidationIssue> out;
    out.swap(issues_);
    return out;
  }

 private:
  const ProblemSpec& spec_;
  std::vector<ValidationIssue> issues_;
};

}  // namespace

ValidationFailed::ValidationFailed(std::vector<ValidationIssue> issues)
    : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}

std::vector<ValidationIssue> check(const ProblemSpec& spec) {
  Checker c(spec);
  if (spec.n < 1) c.add("n", -1, -1, "state dimension must be positive");
  if (spec.m < 1) c.add("m", -1, -1, "control dimension must be positive");
  if (spec.grid.steps < 1) c.add("grid.steps", -1, -1, "steps must be positive");
  if (!(std::isfinite(spec.grid.t0) && std::isfinite(spec.grid.T) && spec.grid.t0 < spec.grid.T)) {
    c.add("grid", -1, -1, "require finite t0 < T");
  }
  // Without sane dimensions and grid nothing else is checkable.
  if (auto structural = c.take(); !structural.empty()) return structural;

  const Eigen::Index n = spec.n, m = spec.m;
  const auto K = spec.marks.size();
  for (std::size_t i = 0; i < K; ++i) {
    const double pi = spec.marks[i].intensity;
    if (!std::isfinite(pi)) {
      c.add("marks", -1, static_cast<int>(i), "non-finite jump intensity");
    } else if (pi < 0.0) {
      c.add("marks", -1, static_cast<int>(i), "negative jump intensity");
    }
  }
  c.path("A", spec.A, n, n);
  c.path("B", spec.B, n, m);
  c.path("C", spec.C, n, n);
  c.path("D", spec.D, n, m);
  c.path("b", spec.b, n, 1);
  c.path("sigma", spec.sigma, n, 1);
  for (auto [name, paths, cols] : {std::tuple{"F", &spec.F, n}, std::tuple{"G", &spec.G, m},
                                   std::tuple{"f", &spec.f, Eigen::Index{1}}}) {
    if (paths->size() != K) {
      c.add(name, -1, -1,
            "expected " + std::to_string(K) + " per-mark entries, got " +
                std::to_string(paths->size()));
      continue;
    }
    for (std::size_t i = 0; i < K; ++i) {
      c.path(name, (*paths)[i], n, cols, false, static_cast<int>(i));
    }
  }
  c.path("Q", spec.Q, n, n, true);
  c.path("S", spec.S, m, n);
  c.path("R", spec.R, m, m, true);
  c.path("q", spec.q, n, 1);
  c.path("rho", spec.rho, m, 1);
  c.matrix("H", spec.H, n, n, true);
  c.matrix("g", spec.g, n, 1, false);
  c.matrix("x0", spec.x0, n, 1, false);
  return c.take();
}

namespace {

Coefficients tabulate(const ProblemSpec& s, auto&& eval) {
  Coefficients c;
  c.A = eval(s.A);
  c.B = eval(s.B);
  c.C = eval(s.C);
  c.D = eval(s.D);
  c.Q = eval(s.Q);
  c.S = eval(s.S);
  c.R = eval(s.R);
  c.b = eval(s.b);
  c.sigma = eval(s.sigma);
  c.q = eval(s.q);
  c.rho = eval(s.rho);
  for (std::size_t i = 0; i < s.marks.size(); ++i) {
    c.F.push_back(eval(s.F[i]));
    c.G.push_back(eval(s.G[i]));
    c.f.push_back(eval(s.f[i]));
    c.pi.push_back(s.marks[i].intensity);
  }
  return c;
}

}  // namespace

Coefficients ValidatedProblem::at(double t) const {
  const auto& s = spec();
  return tabulate(s, [&](const CoefficientPath& p) { return p.at(s.grid, t); });
}

ValidatedProblem validate(ProblemSpec spec) {
  auto issues = check(spec);
  if (!issues.empty()) throw ValidationFailed(std::move(issues));

  auto impl = std::make_shared<ValidatedProblem::Impl>();
  impl->table.reserve(static_cast<std::size_t>(spec.grid.steps) + 1);
  for (int k = 0; k <= spec.grid.steps; ++k) {
    impl->table.push_back(tabulate(spec, [k](const CoefficientPath& p) { return p.at_index(k); }));
  }
  impl->spec = std::move(spec);
  return ValidatedProblem(std::move(impl));
}

ValidatedProblem with_steps(const ValidatedProblem& prob, int steps) {
  ProblemSpec spec = prob.spec();
  spec.grid.steps = steps;
  return validate(std::move(spec));
}

ValidatedProblem homogeneous_part(const ValidatedProblem& prob) {
  ProblemSpec spec = prob.spec();
  const Eigen::Index n = spec.n, m = spec.m;
  spec.b = CoefficientPath::constant(Matrix::Zero(n, 1));
  spec.sigma = CoefficientPath::constant(Matrix::Zero(n, 1));
  for (auto& fi : spec.f) fi = CoefficientPath::constant(Matrix::Zero(n, 1));
  spec.q = CoefficientPath::constant(Matrix::Zero(n, 1));
  spec.rho = CoefficientPath::constant(Matrix::Zero(m, 1));
  spec.g = Vector::Zero(n);
  spec.x0 = Vector::Zero(n);
  return validate(std::move(spec));
}

ProblemSpec zero_spec(int n, int m, int marks, TimeGrid grid) {
  ProblemSpec s;
  s.n = n;
  s.m = m;
  s.grid = grid;
  auto zero = [](Eigen::Index r, Eigen::Index c) { return CoefficientPath::constant(Matrix::Zero(r, c)); };
  for (int i = 0; i < marks; ++i) {
    s.marks.push_back({"e" + std::to_string(i + 1), 0.0});
    s.F.push_back(zero(n, n));
    s.G.push_back(zero(n, m));
    s.f.push_back(zero(n, 1));
  }
  s.A = zero(n, n);
  s.B = zero(n, m);
  s.C = zero(n, n);
  s.D = zero(n, m);
  s.b = zero(n, 1);
  s.sigma = zero(n, 1);
  s.Q = zero(n, n);
  s.S = zero(m, n);
  s.R = zero(m, m);
  s.q = zero(n, 1);
  s.rho = zero(m, 1);
  s.H = Matrix::Zero(n, n);
  s.g = Vector::Zero(n);
  s.x0 = Vector::Zero(n);
  return s;
}

}  // namespace jumplq
