#include "jumplq/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace jumplq {
namespace {

using json = nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path, "missing required key \"" + key + "\"");
  return *it;
}

std::string child(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw SchemaError(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw SchemaError(field, "expected an integer");
  return j.get<int>();
}

Matrix matrix(const json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(field, "expected an array");
  // A flat array of numbers is a column vector.
  if (!j.empty() && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); })) {
    Matrix v(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
    return v;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) throw SchemaError(field, "expected an array of rows");
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw SchemaError(field, "ragged matrix at row " + std::to_string(r));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(r, c) = number(row[static_cast<std::size_t>(c)], field);
    }
  }
  return M;
}

CoefficientPath path(const json& j, const std::string& field) {
  if (!j.is_object()) throw SchemaError(field, "expected {\"const\": ...} or {\"sampled\": ...}");
  if (auto it = j.find("const"); it != j.end()) {
    return CoefficientPath::constant(matrix(*it, field + ".const"));
  }
  if (auto it = j.find("sampled"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(field + ".sampled", "expected an array of matrices");
    std::vector<Matrix> samples;
    samples.reserve(it->size());
    for (std::size_t k = 0; k < it->size(); ++k) {
      samples.push_back(matrix((*it)[k], field + ".sampled[" + std::to_string(k) + "]"));
    }
    return CoefficientPath::sampled(std::move(samples));
  }
  throw SchemaError(field, "expected {\"const\": ...} or {\"sampled\": ...}");
}

std::vector<CoefficientPath> per_mark(const json& doc, const std::string& key) {
  const json& arr = require(doc, key, key);
  if (!arr.is_array()) throw SchemaError(key, "expected an array of paths indexed like marks");
  std::vector<CoefficientPath> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(path(arr[i], key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json matrix_json(const Matrix& M, bool as_vector) {
  if (as_vector) {
    json v = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) v.push_back(M(i, 0));
    return v;
  }
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json path_json(const CoefficientPath& p, bool as_vector) {
  if (p.is_constant()) return {{"const", matrix_json(p.constant_value(), as_vector)}};
  json samples = json::array();
  for (const auto& s : p.samples()) samples.push_back(matrix_json(s, as_vector));
  return {{"sampled", std::move(samples)}};
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

ProblemSpec load_spec(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    const int line = line_of(document, e.byte);
    throw ParseError(line, "line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("", "top level must be an object");

  ProblemSpec s;
  s.n = integer(require(doc, "n", "n"), "n");
  s.m = integer(require(doc, "m", "m"), "m");

  const json& grid = require(doc, "grid", "grid");
  s.grid.t0 = number(require(grid, "t0", "grid.t0"), "grid.t0");
  s.grid.T = number(require(grid, "T", "grid.T"), "grid.T");
  s.grid.steps = integer(require(grid, "steps", "grid.steps"), "grid.steps");

  const json& marks = require(doc, "marks", "marks");
  if (!marks.is_array()) throw SchemaError("marks", "expected an array");
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const std::string field = "marks[" + std::to_string(i) + "]";
    const json& id = require(marks[i], "id", child(field, "id"));
    Mark mark;
    mark.id = id.is_string() ? id.get<std::string>() : id.dump();
    mark.intensity = number(require(marks[i], "pi", child(field, "pi")), child(field, "pi"));
    s.marks.push_back(std::move(mark));
  }

  auto get_path = [&](const char* key) { return path(require(doc, key, key), key); };
  s.A = get_path("A");
  s.B = get_path("B");
  s.C = get_path("C");
  s.D = get_path("D");
  s.F = per_mark(doc, "F");
  s.G = per_mark(doc, "G");
  s.b = get_path("b");
  s.sigma = get_path("sigma");
  s.f = per_mark(doc, "f");
  s.Q = get_path("Q");
  s.S = get_path("S");
  s.R = get_path("R");
  s.q = get_path("q");
  s.rho = get_path("rho");
  s.H = matrix(require(doc, "H", "H"), "H");
  s.g = matrix(require(doc, "g", "g"), "g");
  s.x0 = matrix(require(doc, "x0", "x0"), "x0");
  if (s.g.cols() > 1) throw SchemaError("g", "expected a vector");
  if (s.x0.cols() > 1) throw SchemaError("x0", "expected a vector");
  return s;
}

ProblemSpec load_spec_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_spec(buf.str());
}

std::string save_spec(const ProblemSpec& s) {
  json doc;
  doc["n"] = s.n;
  doc["m"] = s.m;
  doc["grid"] = {{"t0", s.grid.t0}, {"T", s.grid.T}, {"steps", s.grid.steps}};
  doc["marks"] = json::array();
  for (const auto& mark : s.marks) doc["marks"].push_back({{"id", mark.id}, {"pi", mark.intensity}});
  doc["A"] = path_json(s.A, false);
  doc["B"] = path_json(s.B, false);
  doc["C"] = path_json(s.C, false);
  doc["D"] = path_json(s.D, false);
  doc["b"] = path_json(s.b, true);
  doc["sigma"] = path_json(s.sigma, true);
  doc["F"] = json::array();
  doc["G"] = json::array();
  doc["f"] = json::array();
  for (const auto& p : s.F) doc["F"].push_back(path_json(p, false));
  for (const auto& p : s.G) doc["G"].push_back(path_json(p, false));
  for (const auto& p : s.f) doc["f"].push_back(path_json(p, true));
  doc["Q"] = path_json(s.Q, false);
  doc["S"] = path_json(s.S, false);
  doc["R"] = path_json(s.R, false);
  doc["q"] = path_json(s.q, true);
  doc["rho"] = path_json(s.rho, true);
  doc["H"] = matrix_json(s.H, false);
  doc["g"] = matrix_json(s.g, true);
  doc["x0"] = matrix_json(s.x0, true);
  return doc.dump(2) + "\n";
}

}  // namespace jumplq
