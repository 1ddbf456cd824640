#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "jumplq/csv.hpp"
#include "jumplq/errors.hpp"
#include "jumplq/feedforward.hpp"
#include "jumplq/problem_io.hpp"
#include "jumplq/riccati.hpp"
#include "jumplq/simulation.hpp"
#include "jumplq/verification.hpp"

namespace jumplq::cli {
namespace {

using nlohmann::json;

struct Exit {
  int code;
};

ValidatedProblem load_problem(const RunConfig& config, std::ostream& err) {
  ProblemSpec spec;
  try {
    spec = load_spec_file(config.problem_path);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    throw Exit{kParse};
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    throw Exit{kParse};
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    throw Exit{kParse};
  }
  if (config.steps) spec.grid.steps = *config.steps;
  try {
    return validate(std::move(spec));
  } catch (const ValidationFailed& e) {
    for (const auto& issue : e.issues()) err << issue.to_string() << '\n';
    throw Exit{kInvalid};
  }
}

Tolerances tolerances(const RunConfig& config) {
  Tolerances tol;
  if (config.tol_psd) tol.psd = *config.tol_psd;
  if (config.tol_range) tol.range = *config.tol_range;
  return tol;
}

struct Solved {
  ValidatedProblem prob;
  RiccatiSolution ride;
  AdjointSolution adj;
  ClosedLoopStrategy strategy;
};

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.output_dir);
  std::ofstream out(config.output_dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (config.output_dir / name).string());
  return out;
}

Solved solve_all(const RunConfig& config, std::ostream& err) {
  ValidatedProblem prob = load_problem(config, err);
  const Tolerances tol = tolerances(config);
  try {
    RiccatiSolution ride = solve_ride(prob, tol);
    AdjointSolution adj = solve_eta(prob, ride, tol);
    ClosedLoopStrategy strategy = make_strategy(ride, adj);
    return {std::move(prob), std::move(ride), std::move(adj), std::move(strategy)};
  } catch (const ClosedLoopUnsolvable& e) {
    err << "unsolvable: time=" << format_double(e.time()) << " reason=" << to_string(e.reason())
        << '\n';
    json doc = {{"status", "unsolvable"},
                {"time", e.time()},
                {"reason", std::string(to_string(e.reason()))}};
    open_output(config, "solve.json") << doc.dump(2) << '\n';
    throw Exit{kUnsolvable};
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    throw Exit{kNumerical};
  }
}

void write_matrix_path(std::ostream& out, const std::string& name, const TimeGrid& grid,
                       const std::vector<Matrix>& values) {
  out << "k,t";
  if (!values.empty()) {
    for (Eigen::Index i = 0; i < values.front().rows(); ++i) {
      for (Eigen::Index j = 0; j < values.front().cols(); ++j) out << ',' << name << '_' << i << '_' << j;
    }
  }
  out << '\n';
  for (std::size_t k = 0; k < values.size(); ++k) {
    out << k << ',' << format_double(grid.time(static_cast<int>(k)));
    const Matrix& M = values[k];
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      for (Eigen::Index j = 0; j < M.cols(); ++j) out << ',' << format_double(M(i, j));
    }
    out << '\n';
  }
}

void write_vector_path(std::ostream& out, const std::string& name, const TimeGrid& grid,
                       const std::vector<Vector>& values) {
  out << "k,t";
  if (!values.empty()) {
    for (Eigen::Index i = 0; i < values.front().size(); ++i) out << ',' << name << '_' << i;
  }
  out << '\n';
  for (std::size_t k = 0; k < values.size(); ++k) {
    out << k << ',' << format_double(grid.time(static_cast<int>(k)));
    for (Eigen::Index i = 0; i < values[k].size(); ++i) out << ',' << format_double(values[k](i));
    out << '\n';
  }
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Matrix> read_gain_csv(const std::filesystem::path& file, const ValidatedProblem& prob,
                                  std::ostream& err) {
  std::ifstream in(file);
  if (!in) {
    err << "cannot open " << file.string() << '\n';
    throw Exit{kParse};
  }
  std::string line;
  std::getline(in, line);  // header
  std::vector<Matrix> theta;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(std::strtod(cell.c_str(), nullptr));
    const auto expected = static_cast<std::size_t>(2 + prob.m() * prob.n());
    if (fields.size() != expected) {
      err << file.string() << ": expected " << expected << " columns, got " << fields.size() << '\n';
      throw Exit{kParse};
    }
    Matrix M(prob.m(), prob.n());
    for (int i = 0; i < prob.m(); ++i) {
      for (int j = 0; j < prob.n(); ++j) M(i, j) = fields[static_cast<std::size_t>(2 + i * prob.n() + j)];
    }
    theta.push_back(std::move(M));
  }
  if (static_cast<int>(theta.size()) != prob.grid().steps + 1) {
    err << file.string() << ": expected " << prob.grid().steps + 1 << " rows, got " << theta.size()
        << '\n';
    throw Exit{kParse};
  }
  return theta;
}

Vector evaluation_state(const RunConfig& config, const ValidatedProblem& prob, std::ostream& err) {
  if (!config.x) return prob.spec().x0;
  if (static_cast<int>(config.x->size()) != prob.n()) {
    err << "--x needs " << prob.n() << " values, got " << config.x->size() << '\n';
    throw Exit{kUsage};
  }
  return Eigen::Map<const Vector>(config.x->data(), prob.n());
}

std::string significant12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ValidatedProblem prob = load_problem(config, err);
  out << "OK n=" << prob.n() << " m=" << prob.m() << " K=" << prob.jump_count() << '\n';
  return kOk;
}

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Solved s = solve_all(config, err);
  const TimeGrid& grid = s.prob.grid();

  {
    auto file = open_output(config, "P.csv");
    write_matrix_path(file, "P", grid, s.ride.P);
  }
  {
    auto file = open_output(config, "Theta.csv");
    write_matrix_path(file, "Theta", grid, s.strategy.theta);
  }
  {
    auto file = open_output(config, "eta.csv");
    write_vector_path(file, "eta", grid, s.adj.eta);
  }
  {
    auto file = open_output(config, "v.csv");
    write_vector_path(file, "v", grid, s.strategy.v);
  }

  json certs = json::array();
  for (std::size_t k = 0; k < s.ride.certificates.size(); ++k) {
    const auto& c = s.ride.certificates[k];
    certs.push_back({{"k", k},
                     {"t", grid.time(static_cast<int>(k))},
                     {"psd_ok", c.psd_ok},
                     {"range_ok", c.range_ok},
                     {"feedforward_range_ok", static_cast<bool>(s.adj.range_ok[k])},
                     {"theta_norm", c.theta_norm}});
  }
  const Tolerances tol = tolerances(config);
  json doc = {{"status", "solved"},
              {"n", s.prob.n()},
              {"m", s.prob.m()},
              {"K", s.prob.jump_count()},
              {"grid", {{"t0", grid.t0}, {"T", grid.T}, {"steps", grid.steps}}},
              {"tolerances", {{"psd", tol.psd}, {"range", tol.range}}},
              {"theta_l2_norm", s.ride.theta_l2_norm},
              {"P_t0", matrix_json(s.ride.P.front())},
              {"eta_t0", matrix_json(s.adj.eta.front())},
              {"certificates", std::move(certs)}};
  open_output(config, "solve.json") << doc.dump(2) << '\n';

  out << "solved n=" << s.prob.n() << " m=" << s.prob.m() << " K=" << s.prob.jump_count()
      << " steps=" << grid.steps << " theta_l2_norm=" << format_double(s.ride.theta_l2_norm) << '\n';
  return kOk;
}

int cmd_value(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Solved s = solve_all(config, err);
  const Vector x = evaluation_state(config, s.prob, err);
  const ValueBreakdown v = value_function(s.ride, s.adj, s.prob, 0, x);

  json xs = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) xs.push_back(x(i));
  json doc = {{"t", s.prob.grid().t0},
              {"x", std::move(xs)},
              {"value", v.total()},
              {"quadratic", v.quadratic},
              {"linear", v.linear},
              {"integral", v.integral}};
  open_output(config, "value.json") << doc.dump(2) << '\n';
  out << significant12(v.total()) << '\n';
  return kOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Solved s = solve_all(config, err);
  const ValidatedProblem& prob = s.prob;
  const NoisePlan plan{config.seed, config.paths};
  const ControlLaw law = closed_loop_law(s.strategy);

  const int exported = std::clamp(config.export_paths, 0, config.paths);
  std::vector<Trajectory> kept(static_cast<std::size_t>(exported));
  std::vector<double> costs(static_cast<std::size_t>(config.paths));
  std::vector<Vector> terminal(static_cast<std::size_t>(config.paths));
  try {
    parallel_for_paths(config.paths, config.threads, [&](int p) {
      const auto idx = static_cast<std::size_t>(p);
      Trajectory traj = simulate_path(prob, law, plan, p);
      costs[idx] = cost_along(traj, prob);
      terminal[idx] = traj.X.col(traj.X.cols() - 1);
      if (p < exported) kept[idx] = std::move(traj);
    });
  } catch (const SimulationFailure& e) {
    err << "numerical failure on path " << e.path() << " step " << e.step() << ": " << e.what() << '\n';
    return kNumerical;
  }

  {
    auto file = open_output(config, "trajectories.csv");
    write_trajectories_csv(file, kept, prob.grid(), prob.n(), prob.m(), prob.jump_count());
  }
  {
    auto file = open_output(config, "costs.csv");
    file << "path,cost\n";
    for (std::size_t p = 0; p < costs.size(); ++p) file << p << ',' << format_double(costs[p]) << '\n';
  }

  const CostReport report = summarize(costs);
  out << "cost mean=" << significant12(report.mean) << " se=" << significant12(report.std_error)
      << " paths=" << report.paths << '\n';
  for (int i = 0; i < prob.n(); ++i) {
    std::vector<double> xi;
    xi.reserve(terminal.size());
    for (const auto& x : terminal) xi.push_back(x(i));
    const CostReport xr = summarize(std::move(xi));
    const double x0 = prob.spec().x0(i);
    out << "X_T[" << i << "] mean=" << significant12(xr.mean) << " se=" << significant12(xr.std_error)
        << " x0=" << significant12(x0)
        << " within_3se=" << (std::abs(xr.mean - x0) <= 3.0 * xr.std_error ? "yes" : "no") << '\n';
  }
  return kOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Solved s = solve_all(config, err);
  if (config.theta_override) {
    s.strategy.theta = read_gain_csv(*config.theta_override, s.prob, err);
  }
  const NoisePlan plan{config.seed, config.paths};
  VerificationSettings settings;
  settings.probe_seed = config.seed;

  VerificationRun run;
  try {
    run = run_verification(s.prob, s.ride, s.adj, s.strategy, plan, settings, config.threads);
  } catch (const SimulationFailure& e) {
    err << "numerical failure on path " << e.path() << " step " << e.step() << ": " << e.what() << '\n';
    return kNumerical;
  }
  open_output(config, "verify.json") << verification_json(run, plan, s.prob.grid().steps);

  for (const auto& c : run.checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " lhs=" << significant12(c.lhs)
        << " rhs=" << significant12(c.rhs) << " gap=" << significant12(c.gap)
        << " tol=" << significant12(c.tolerance) << '\n';
  }
  if (!run.all_pass()) {
    err << "verification failed:";
    for (const auto& c : run.checks) {
      if (!c.pass) err << ' ' << c.name;
    }
    err << '\n';
    return kVerificationFailed;
  }
  return kOk;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.paths < 1) {
      err << "--paths must be at least 1\n";
      return kUsage;
    }
    if (config.command == "validate") return cmd_validate(config, out, err);
    if (config.command == "solve") return cmd_solve(config, out, err);
    if (config.command == "value") return cmd_value(config, out, err);
    if (config.command == "simulate") return cmd_simulate(config, out, err);
    if (config.command == "verify") return cmd_verify(config, out, err);
    err << "unknown command " << config.command << '\n';
    return kUsage;
  } catch (const Exit& e) {
    return e.code;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

int main_with_args(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop stochastic LQ control with Poisson jumps: solve, simulate, verify"};
  app.require_subcommand(1);

  RunConfig config;
  std::vector<double> x;
  int steps = 0;
  double tol_psd = 0.0, tol_range = 0.0;
  std::string theta;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", config.problem_path, "Problem JSON file")->required();
    sub->add_option("--steps", steps, "Override the number of grid steps")->check(CLI::PositiveNumber);
    sub->add_option("--out", config.output_dir, "Output directory");
    sub->add_option("--tol-psd", tol_psd, "PSD gate tolerance")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol-range", tol_range, "Range gate tolerance")->check(CLI::NonNegativeNumber);
  };
  auto add_mc = [&](CLI::App* sub) {
    sub->add_option("--seed", config.seed, "Master noise seed");
    sub->add_option("--paths", config.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    sub->add_option("--threads", config.threads, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a problem file");
  add_common(validate_cmd);
  auto* solve_cmd = app.add_subcommand("solve", "Solve the Riccati and adjoint equations");
  add_common(solve_cmd);
  auto* value_cmd = app.add_subcommand("value", "Evaluate the value function at t0");
  add_common(value_cmd);
  value_cmd->add_option("--x", x, "State, comma separated")->delimiter(',');
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the closed-loop system");
  add_common(simulate_cmd);
  add_mc(simulate_cmd);
  simulate_cmd->add_option("--export-paths", config.export_paths,
                           "Paths written to trajectories.csv")->check(CLI::NonNegativeNumber);
  auto* verify_cmd = app.add_subcommand("verify", "Run the optimality checks");
  add_common(verify_cmd);
  add_mc(verify_cmd);
  verify_cmd->add_option("--theta", theta, "Theta.csv replacing the solved feedback gain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  config.command = app.get_subcommands().front()->get_name();
  auto* sub = app.get_subcommands().front();
  if (sub->count("--steps")) config.steps = steps;
  if (sub->count("--tol-psd")) config.tol_psd = tol_psd;
  if (sub->count("--tol-range")) config.tol_range = tol_range;
  if (config.command == "value" && value_cmd->count("--x")) config.x = x;
  if (config.command == "verify" && !theta.empty()) config.theta_override = theta;
  return run(config, out, err);
}

}  // namespace jumplq::cli
