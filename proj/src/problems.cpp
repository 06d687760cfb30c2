#include "sparseopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sparseopt {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::spd_diag_dominant: return "spd_diag_dominant";
    case ProblemKind::planted_ls: return "planted_ls";
    case ProblemKind::kk_diagonal: return "kk_diagonal";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "spd_diag_dominant" || name == "spd") return ProblemKind::spd_diag_dominant;
  if (name == "planted_ls" || name == "ls") return ProblemKind::planted_ls;
  if (name == "kk_diagonal" || name == "kk") return ProblemKind::kk_diagonal;
  throw std::invalid_argument("unknown problem kind: " + name);
}

void GeneratorSpec::validate() const {
  if (n == 0) throw std::invalid_argument("generator: n must be positive");
  if (s < 1 || s > n) throw std::invalid_argument("generator: need 1 <= s <= n");
  if (!(density_xstar > 0.0 && density_xstar <= 1.0)) {
    throw std::invalid_argument("generator: density_xstar must lie in (0, 1]");
  }
  if (!(value_range.first < value_range.second) || !std::isfinite(value_range.first) ||
      !std::isfinite(value_range.second)) {
    throw std::invalid_argument("generator: degenerate value range");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("generator: delta must be positive");
  if (m && kind != ProblemKind::planted_ls) {
    throw std::invalid_argument("generator: m applies to planted_ls only");
  }
  if (m && *m < n) throw std::invalid_argument("generator: need m >= n");
  if (kind == ProblemKind::kk_diagonal &&
      !(value_range.first > 0.0 && value_range.second < 1.0)) {
    throw std::invalid_argument("generator: kk spectrum must lie in (0, 1)");
  }
}

QuadraticProblem GeneratedProblem::quadratic() const {
  if (kind == ProblemKind::planted_ls) {
    throw std::invalid_argument("least-squares instance is not a quadratic problem");
  }
  return {a, b, fstar, mu};
}

LeastSquaresProblem GeneratedProblem::least_squares() const {
  if (kind != ProblemKind::planted_ls) {
    throw std::invalid_argument("instance is not a least-squares problem");
  }
  return {a, b, fstar};
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Nonzero draw from [lo, hi).
double nonzero_value(Rng& rng, std::pair<double, double> range) {
  double v = 0.0;
  while (v == 0.0) v = uniform(rng, range.first, range.second);
  return v;
}

std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

Vector plant(Rng& rng, std::size_t n, double density) {
  const auto support = static_cast<std::size_t>(std::ceil(density * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first `support` slots are a uniform sample.
  for (std::size_t t = 0; t < support; ++t) std::swap(idx[t], idx[t + pick(rng, n - t)]);
  Vector x(n, 0.0);
  for (std::size_t t = 0; t < support; ++t) x[idx[t]] = uniform(rng, 0.5, 1.5);
  return x;
}

/// Random pattern with at most `cap` off-diagonal entries per row and column.
/// `accept` enforces the caps; rejection tries are bounded, so rows may end up
/// short.
template <class Accept>
void fill_pattern(Rng& rng, std::size_t rows, std::size_t cols, std::size_t cap, Accept accept) {
  if (cap == 0) return;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t attempt = 0; attempt < 4 * cap; ++attempt) accept(pick(rng, rows), j);
  }
}

}  // namespace

GeneratedProblem gen_sparse_spd(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.kind != ProblemKind::spd_diag_dominant) {
    throw std::invalid_argument("gen_sparse_spd: wrong kind");
  }
  const std::size_t n = spec.n;
  const std::size_t cap = spec.s - 1;
  Rng rng(spec.seed);

  std::vector<std::size_t> degree(n, 0);
  std::vector<std::vector<std::size_t>> neighbours(n);
  std::vector<Triple> triples;
  Vector row_abs(n, 0.0);
  fill_pattern(rng, n, n, cap, [&](std::size_t i, std::size_t j) {
    if (i == j || degree[i] >= cap || degree[j] >= cap) return false;
    auto& nj = neighbours[j];
    if (std::find(nj.begin(), nj.end(), i) != nj.end()) return false;
    nj.push_back(i);
    neighbours[i].push_back(j);
    ++degree[i];
    ++degree[j];
    const double v = nonzero_value(rng, spec.value_range);
    triples.push_back({i, j, v});
    triples.push_back({j, i, v});
    row_abs[i] += std::abs(v);
    row_abs[j] += std::abs(v);
    return true;
  });
  for (std::size_t i = 0; i < n; ++i) triples.push_back({i, i, row_abs[i] + spec.delta});

  GeneratedProblem out;
  out.kind = spec.kind;
  out.a = SparseMatrix::build(std::move(triples), n, n, true);
  out.x_star = plant(rng, n, spec.density_xstar);
  out.b = multiply(out.a, out.x_star);
  out.fstar = -0.5 * dot(out.b, out.x_star);
  out.mu = spec.delta;
  out.s = spec.s;
  out.seed = spec.seed;
  return out;
}

GeneratedProblem gen_planted_ls(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.kind != ProblemKind::planted_ls) {
    throw std::invalid_argument("gen_planted_ls: wrong kind");
  }
  const std::size_t n = spec.n;
  const std::size_t m = spec.m.value_or(n);
  const std::size_t cap = spec.s - 1;
  Rng rng(spec.seed);

  // Row degree counts the diagonal of the top block; column degree likewise.
  std::vector<std::size_t> row_degree(m, 0);
  std::vector<std::size_t> col_degree(n, 1);
  for (std::size_t i = 0; i < n; ++i) row_degree[i] = 1;
  std::vector<std::vector<std::size_t>> col_rows(n);
  std::vector<Triple> triples;
  Vector col_abs(n, 0.0);
  fill_pattern(rng, m, n, cap, [&](std::size_t i, std::size_t j) {
    if (i == j || row_degree[i] >= spec.s || col_degree[j] >= spec.s) return false;
    auto& rows = col_rows[j];
    if (std::find(rows.begin(), rows.end(), i) != rows.end()) return false;
    rows.push_back(i);
    ++row_degree[i];
    ++col_degree[j];
    const double v = nonzero_value(rng, spec.value_range);
    triples.push_back({i, j, v});
    col_abs[j] += std::abs(v);
    return true;
  });
  for (std::size_t j = 0; j < n; ++j) triples.push_back({j, j, col_abs[j] + spec.delta});

  GeneratedProblem out;
  out.kind = spec.kind;
  out.a = SparseMatrix::build(std::move(triples), m, n, false);
  out.x_star = plant(rng, n, spec.density_xstar);
  out.b = multiply(out.a, out.x_star);
  out.fstar = 0.0;
  out.s = spec.s;
  out.seed = spec.seed;
  return out;
}

GeneratedProblem gen_kk_diagonal(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.kind != ProblemKind::kk_diagonal) {
    throw std::invalid_argument("gen_kk_diagonal: wrong kind");
  }
  const std::size_t n = spec.n;
  Rng rng(spec.seed);
  Vector lambda(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lambda[i] = uniform(rng, spec.value_range.first, spec.value_range.second);
  }
  lambda[n - 1] = spec.value_range.second;
  std::sort(lambda.begin(), lambda.end());

  std::vector<Triple> triples;
  for (std::size_t i = 0; i < n; ++i) triples.push_back({i, i, 1.0 - lambda[i]});
  GeneratedProblem out;
  out.kind = spec.kind;
  out.a = SparseMatrix::build(std::move(triples), n, n, true);
  out.b.assign(n, 0.0);
  out.b[0] = 1.0;
  out.x_star.assign(n, 0.0);
  out.x_star[0] = 1.0 / (1.0 - lambda[0]);
  out.fstar = -0.5 * out.x_star[0];
  out.mu = 1.0 - lambda[n - 1];
  out.s = 1;
  out.seed = spec.seed;
  return out;
}

GeneratedProblem generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::spd_diag_dominant: return gen_sparse_spd(spec);
    case ProblemKind::planted_ls: return gen_planted_ls(spec);
    case ProblemKind::kk_diagonal: return gen_kk_diagonal(spec);
  }
  throw std::invalid_argument("generate: unknown kind");
}

std::size_t default_sparsity(std::size_t n) {
  if (n == 0) return 0;
  const auto s = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.4)));
  return std::min(s, n);
}

Vector kk_spectrum(const SparseMatrix& a) {
  Vector lambda = a.diagonal();
  for (auto& l : lambda) l = 1.0 - l;
  return lambda;
}

}  // namespace sparseopt
