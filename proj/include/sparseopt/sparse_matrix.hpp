#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sparseopt {

using Vector = std::vector<double>;

struct Triple {
  std::size_t row;
  std::size_t col;
  double value;

  friend bool operator==(const Triple&, const Triple&) = default;
};

/// One stored nonzero of a row (index = column) or of a column (index = row).
struct Entry {
  std::size_t index;
  double value;
};

/// A sparse matrix held simultaneously in row-major and column-major
/// adjacency. Entries inside each row and column are sorted by index, stored
/// zeros are dropped, and the scalar constants the solvers need are cached at
/// build time. Immutable once built.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Validates and assembles a matrix from coordinate triples.
  ///
  /// With `symmetric` set, each off-diagonal entry whose transpose is absent
  /// is mirrored, so either a full symmetric list or one triangle may be
  /// given. Throws std::out_of_range for bad indices and
  /// std::invalid_argument for duplicates or inconsistent transposes.
  static SparseMatrix build(std::vector<Triple> triples, std::size_t n_rows,
                            std::size_t n_cols, bool symmetric = false);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return row_entries_.size(); }
  bool symmetric() const { return symmetric_; }

  std::span<const Entry> row(std::size_t i) const {
    return {row_entries_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const Entry> col(std::size_t j) const {
    return {col_entries_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }

  /// max |A_ij|
  double max_abs_entry() const { return max_abs_entry_; }
  /// max over columns of the squared 2-norm of the column.
  double max_col_sqnorm() const { return max_col_sqnorm_; }
  double col_sqnorm(std::size_t j) const { return col_sqnorm_[j]; }
  /// max nnz over rows / columns.
  std::size_t s_row() const { return s_row_; }
  std::size_t s_col() const { return s_col_; }

  /// A_ij by binary search in row i; zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  Vector diagonal() const;

  /// All stored entries in row-major order.
  std::vector<Triple> triples() const;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  bool symmetric_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Entry> row_entries_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<Entry> col_entries_;
  std::vector<double> col_sqnorm_;
  double max_abs_entry_ = 0.0;
  double max_col_sqnorm_ = 0.0;
  std::size_t s_row_ = 0;
  std::size_t s_col_ = 0;
};

/// y = A x. Throws std::invalid_argument on dimension mismatch.
Vector multiply(const SparseMatrix& a, std::span<const double> x);
/// y = A^T x.
Vector multiply_transpose(const SparseMatrix& a, std::span<const double> x);

struct PowerResult {
  double lambda = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration from a
/// seeded random start. Stops once the eigen-residual ||Av - rho v|| drops
/// below tol * rho, which places an eigenvalue within tol * rho of the
/// returned Rayleigh quotient.
PowerResult power_lambda_max(const SparseMatrix& a, std::size_t max_iters,
                             double tol, std::uint64_t seed);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace sparseopt
