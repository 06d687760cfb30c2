#pragma once

#include <iosfwd>
#include <string>

#include "sparseopt/problems.hpp"
#include "sparseopt/sparse_matrix.hpp"

namespace sparseopt {

/// Reads a coordinate Matrix Market matrix (real or integer field, general or
/// symmetric). A symmetric file yields a symmetric matrix with the missing
/// triangle mirrored. Throws std::runtime_error on malformed input.
SparseMatrix mm_read(std::istream& in);
SparseMatrix mm_read(const std::string& path);

/// Writes coordinate/real; symmetric matrices store the lower triangle only.
void mm_write(std::ostream& out, const SparseMatrix& a);
void mm_write(const std::string& path, const SparseMatrix& a);

/// Dense vector, one value per line after a `%` comment header.
Vector read_vector(std::istream& in);
Vector read_vector(const std::string& path);
void write_vector(std::ostream& out, const Vector& v);
void write_vector(const std::string& path, const Vector& v);

/// Generator metadata: kind, shape, s, mu, fstar, ||x*||_1, seed.
struct ProblemMeta {
  ProblemKind kind = ProblemKind::spd_diag_dominant;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::size_t s = 0;
  std::optional<double> mu;
  std::optional<double> fstar;
  std::optional<double> x_star_l1;
  std::uint64_t seed = 0;
};

ProblemMeta meta_of(const GeneratedProblem& problem);
void write_meta(const std::string& path, const ProblemMeta& meta);
ProblemMeta read_meta(const std::string& path);

}  // namespace sparseopt
