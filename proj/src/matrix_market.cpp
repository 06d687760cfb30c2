#include "sparseopt/matrix_market.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace sparseopt {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("matrix market: " + what); }

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

SparseMatrix mm_read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail("empty input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") fail("missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") fail("unsupported object '" + object + "'");
  if (format != "coordinate") fail("only coordinate format is supported");
  if (field != "real" && field != "integer" && field != "double") {
    fail("unsupported field '" + field + "'");
  }
  bool symmetric = false;
  if (symmetry == "symmetric") {
    symmetric = true;
  } else if (symmetry != "general") {
    fail("unsupported symmetry '" + symmetry + "'");
  }

  if (!next_data_line(in, line)) fail("missing size line");
  std::istringstream size_line(line);
  long long rows = -1, cols = -1, entries = -1;
  if (!(size_line >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0) {
    fail("malformed size line");
  }

  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(entries));
  for (long long e = 0; e < entries; ++e) {
    if (!next_data_line(in, line)) fail("fewer entries than declared");
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j >> v)) fail("malformed entry line: " + line);
    if (i < 1 || j < 1 || i > rows || j > cols) {
      fail(fmt::format("index ({}, {}) outside {} x {}", i, j, rows, cols));
    }
    triples.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v});
  }
  if (next_data_line(in, line)) fail("more entries than declared");
  return SparseMatrix::build(std::move(triples), static_cast<std::size_t>(rows),
                             static_cast<std::size_t>(cols), symmetric);
}

SparseMatrix mm_read(const std::string& path) {
  auto in = open_in(path);
  return mm_read(in);
}

void mm_write(std::ostream& out, const SparseMatrix& a) {
  std::vector<Triple> triples = a.triples();
  if (a.symmetric()) {
    std::erase_if(triples, [](const Triple& t) { return t.col > t.row; });
  }
  out << "%%MatrixMarket matrix coordinate real " << (a.symmetric() ? "symmetric" : "general")
      << '\n';
  out << fmt::format("{} {} {}\n", a.n_rows(), a.n_cols(), triples.size());
  for (const Triple& t : triples) out << fmt::format("{} {} {:.17g}\n", t.row + 1, t.col + 1, t.value);
}

void mm_write(const std::string& path, const SparseMatrix& a) {
  auto out = open_out(path);
  mm_write(out, a);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vector read_vector(std::istream& in) {
  Vector v;
  std::string line;
  // An optional "% vector n" header fixes the expected length.
  std::optional<std::size_t> declared;
  if (in.peek() == '%' && std::getline(in, line)) {
    std::istringstream hs(line);
    std::string pct, word;
    std::size_t n = 0;
    if (hs >> pct >> word >> n && word == "vector") declared = n;
  }
  while (next_data_line(in, line)) {
    std::istringstream ls(line);
    double x = 0.0;
    std::string rest;
    if (!(ls >> x) || (ls >> rest)) throw std::runtime_error("vector: malformed line: " + line);
    v.push_back(x);
  }
  if (declared && *declared != v.size()) {
    throw std::runtime_error(
        fmt::format("vector: header declares {} entries, found {}", *declared, v.size()));
  }
  return v;
}

Vector read_vector(const std::string& path) {
  auto in = open_in(path);
  return read_vector(in);
}

void write_vector(std::ostream& out, const Vector& v) {
  out << "% vector " << v.size() << '\n';
  for (double x : v) out << fmt::format("{:.17g}\n", x);
}

void write_vector(const std::string& path, const Vector& v) {
  auto out = open_out(path);
  write_vector(out, v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ProblemMeta meta_of(const GeneratedProblem& problem) {
  ProblemMeta m;
  m.kind = problem.kind;
  m.n_rows = problem.a.n_rows();
  m.n_cols = problem.a.n_cols();
  m.s = problem.s;
  m.mu = problem.mu;
  m.fstar = problem.fstar;
  m.x_star_l1 = problem.x_star_l1();
  m.seed = problem.seed;
  return m;
}

void write_meta(const std::string& path, const ProblemMeta& meta) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(meta.kind);
  j["n_rows"] = meta.n_rows;
  j["n_cols"] = meta.n_cols;
  j["s"] = meta.s;
  j["mu"] = meta.mu ? nlohmann::ordered_json(*meta.mu) : nlohmann::ordered_json(nullptr);
  j["fstar"] = meta.fstar ? nlohmann::ordered_json(*meta.fstar) : nlohmann::ordered_json(nullptr);
  j["x_star_l1"] =
      meta.x_star_l1 ? nlohmann::ordered_json(*meta.x_star_l1) : nlohmann::ordered_json(nullptr);
  j["seed"] = meta.seed;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

ProblemMeta read_meta(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("metadata: " + std::string(e.what()));
  }
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
  };
  ProblemMeta m;
  try {
    m.kind = problem_kind_from_string(j.at("kind").get<std::string>());
    m.n_rows = j.at("n_rows").get<std::size_t>();
    m.n_cols = j.at("n_cols").get<std::size_t>();
    m.s = j.value("s", std::size_t{0});
    m.mu = opt("mu");
    m.fstar = opt("fstar");
    m.x_star_l1 = opt("x_star_l1");
    m.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("metadata: " + std::string(e.what()));
  }
  return m;
}

}  // namespace sparseopt
