#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace jumplq::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalid = 2,
  kParse = 3,
  kUnsolvable = 4,
  kNumerical = 5,
  kVerificationFailed = 6,
};

struct RunConfig {
  std::string command;
  std::filesystem::path problem_path;
  std::uint64_t seed = 0;
  int paths = 10000;
  std::optional<int> steps;             ///< overrides the file's grid
  std::optional<std::vector<double>> x; ///< evaluation state for `value`
  std::filesystem::path output_dir = ".";
  std::optional<double> tol_psd;
  std::optional<double> tol_range;
  std::optional<std::filesystem::path> theta_override;  ///< Theta.csv replacing the solved gain
  int threads = 1;
  int export_paths = 100;  ///< paths written to trajectories.csv
};

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_value(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Dispatches on config.command.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (subcommand first) and runs it.
int main_with_args(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace jumplq::cli
