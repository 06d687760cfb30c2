#include "sparseopt/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace sparseopt {

namespace {

bool row_major_less(const Triple& a, const Triple& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

bool same_position(const Triple& a, const Triple& b) {
  return a.row == b.row && a.col == b.col;
}

std::string position(const Triple& t) {
  return "(" + std::to_string(t.row) + ", " + std::to_string(t.col) + ")";
}

}  // namespace

SparseMatrix SparseMatrix::build(std::vector<Triple> triples, std::size_t n_rows,
                                 std::size_t n_cols, bool symmetric) {
  if (symmetric && n_rows != n_cols) {
    throw std::invalid_argument("symmetric matrix must be square");
  }
  for (const auto& t : triples) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw std::out_of_range("entry " + position(t) + " outside " +
                              std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
    if (!std::isfinite(t.value)) {
      throw std::invalid_argument("non-finite value at " + position(t));
    }
  }

  std::sort(triples.begin(), triples.end(), row_major_less);
  for (std::size_t k = 1; k < triples.size(); ++k) {
    if (same_position(triples[k - 1], triples[k])) {
      throw std::invalid_argument("duplicate entry " + position(triples[k]));
    }
  }
  std::erase_if(triples, [](const Triple& t) { return t.value == 0.0; });

  if (symmetric) {
    std::vector<Triple> mirrored;
    for (const auto& t : triples) {
      if (t.row == t.col) continue;
      const Triple probe{t.col, t.row, 0.0};
      auto it = std::lower_bound(triples.begin(), triples.end(), probe, row_major_less);
      if (it != triples.end() && same_position(*it, probe)) {
        if (it->value != t.value) {
          throw std::invalid_argument("asymmetric entries at " + position(t) + " and " +
                                      position(probe));
        }
      } else {
        mirrored.push_back({t.col, t.row, t.value});
      }
    }
    triples.insert(triples.end(), mirrored.begin(), mirrored.end());
    std::sort(triples.begin(), triples.end(), row_major_less);
  }

  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.symmetric_ = symmetric;

  m.row_ptr_.assign(n_rows + 1, 0);
  m.col_ptr_.assign(n_cols + 1, 0);
  for (const auto& t : triples) {
    ++m.row_ptr_[t.row + 1];
    ++m.col_ptr_[t.col + 1];
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    m.s_row_ = std::max(m.s_row_, m.row_ptr_[i + 1]);
    m.row_ptr_[i + 1] += m.row_ptr_[i];
  }
  for (std::size_t j = 0; j < n_cols; ++j) {
    m.s_col_ = std::max(m.s_col_, m.col_ptr_[j + 1]);
    m.col_ptr_[j + 1] += m.col_ptr_[j];
  }

  m.row_entries_.resize(triples.size());
  m.col_entries_.resize(triples.size());
  m.col_sqnorm_.assign(n_cols, 0.0);
  std::vector<std::size_t> col_fill(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  // Row-major traversal fills each column in increasing row order.
  for (std::size_t k = 0; k < triples.size(); ++k) {
    const auto& t = triples[k];
    m.row_entries_[k] = {t.col, t.value};
    m.col_entries_[col_fill[t.col]++] = {t.row, t.value};
    m.col_sqnorm_[t.col] += t.value * t.value;
    m.max_abs_entry_ = std::max(m.max_abs_entry_, std::abs(t.value));
  }
  for (double c : m.col_sqnorm_) m.max_col_sqnorm_ = std::max(m.max_col_sqnorm_, c);
  return m;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  auto r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Entry& e, std::size_t idx) { return e.index < idx; });
  return (it != r.end() && it->index == j) ? it->value : 0.0;
}

Vector SparseMatrix::diagonal() const {
  Vector d(std::min(n_rows_, n_cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

std::vector<Triple> SparseMatrix::triples() const {
  std::vector<Triple> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (const auto& e : row(i)) out.push_back({i, e.index, e.value});
  }
  return out;
}

Vector multiply(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.n_cols()) {
    throw std::invalid_argument("apply: vector length " + std::to_string(x.size()) +
                                " != " + std::to_string(a.n_cols()) + " columns");
  }
  Vector y(a.n_rows(), 0.0);
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    double acc = 0.0;
    for (const auto& e : a.row(i)) acc += e.value * x[e.index];
    y[i] = acc;
  }
  return y;
}

Vector multiply_transpose(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.n_rows()) {
    throw std::invalid_argument("apply_transpose: vector length " + std::to_string(x.size()) +
                                " != " + std::to_string(a.n_rows()) + " rows");
  }
  Vector y(a.n_cols(), 0.0);
  for (std::size_t j = 0; j < a.n_cols(); ++j) {
    double acc = 0.0;
    for (const auto& e : a.col(j)) acc += e.value * x[e.index];
    y[j] = acc;
  }
  return y;
}

PowerResult power_lambda_max(const SparseMatrix& a, std::size_t max_iters, double tol,
                             std::uint64_t seed) {
  if (!a.symmetric()) throw std::invalid_argument("power_lambda_max: matrix is not symmetric");
  PowerResult result;
  const std::size_t n = a.n_rows();
  if (n == 0 || a.nnz() == 0) {
    result.converged = true;
    return result;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector v(n);
  for (auto& vi : v) vi = unif(rng);
  double nv = norm2(v);
  for (auto& vi : v) vi /= nv;

  for (std::size_t it = 1; it <= max_iters; ++it) {
    Vector av = multiply(a, v);
    const double rho = dot(v, av);
    double res2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = av[i] - rho * v[i];
      res2 += r * r;
    }
    result.lambda = rho;
    result.iterations = it;
    if (std::sqrt(res2) <= tol * std::abs(rho)) {
      result.converged = true;
      return result;
    }
    const double nav = norm2(av);
    if (nav == 0.0) {
      // v landed in the null space; the largest eigenvalue of a nonzero PSD
      // matrix is positive, so restart from a fresh direction.
      for (auto& vi : v) vi = unif(rng);
      nv = norm2(v);
      for (auto& vi : v) vi /= nv;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = av[i] / nav;
  }
  return result;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm1(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += std::abs(v);
  return acc;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace sparseopt
