#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "jumplq/problem.hpp"

namespace jumplq {

/// Malformed JSON text. `line` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed JSON that does not describe a problem. `field` names the
/// offending key path, e.g. "F[1]" or "grid.steps".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parses a problem document:
///
///   {"n", "m", "grid": {"t0", "T", "steps"}, "marks": [{"id", "pi"}, ...],
///    "A", "B", "C", "D", "F", "G", "b", "sigma", "f",
///    "Q", "S", "R", "q", "rho", "H", "g", "x0"}
///
/// Matrix paths are {"const": [[...], ...]} or {"sampled": [[[...]], ...]}
/// with steps+1 samples. Vector paths accept a flat array in place of a
/// column matrix. F, G and f are arrays of paths indexed like "marks".
/// H is a plain matrix; g and x0 are plain vectors.
///
/// The result is not validated; call validate() on it.
ProblemSpec load_spec(const std::string& document);
ProblemSpec load_spec_file(const std::filesystem::path& path);

/// Serializes with shortest round-trip number formatting, so
/// load_spec(save_spec(s)) == s bit-exactly.
std::string save_spec(const ProblemSpec& spec);

}  // namespace jumplq
