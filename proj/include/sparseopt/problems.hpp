#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "sparseopt/frank_wolfe.hpp"
#include "sparseopt/greedy.hpp"
#include "sparseopt/sparse_matrix.hpp"

namespace sparseopt {

enum class ProblemKind { spd_diag_dominant, planted_ls, kk_diagonal };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

struct GeneratorSpec {
  std::size_t n = 0;
  std::optional<std::size_t> m;  // rows of a least-squares matrix, default n
  /// Max nnz per row and per column, diagonal included.
  std::size_t s = 1;
  ProblemKind kind = ProblemKind::spd_diag_dominant;
  double density_xstar = 0.05;
  std::pair<double, double> value_range{-1.0, 1.0};
  std::uint64_t seed = 0;
  /// Diagonal dominance margin (spd, planted_ls).
  double delta = 1.0;

  /// Throws std::invalid_argument on infeasible parameters.
  void validate() const;
};

/// A generated instance together with its planted solution.
struct GeneratedProblem {
  ProblemKind kind = ProblemKind::spd_diag_dominant;
  SparseMatrix a;
  Vector b;
  Vector x_star;
  double fstar = 0.0;
  std::optional<double> mu;
  std::size_t s = 0;
  std::uint64_t seed = 0;

  double x_star_l1() const { return norm1(x_star); }
  QuadraticProblem quadratic() const;
  LeastSquaresProblem least_squares() const;
};

/// Symmetric A with at most s - 1 off-diagonal entries per row and
/// A_ii = sum_{j != i} |A_ij| + delta, so lambda_min(A) >= delta = mu.
/// b = A x*, fstar = f(x*) = -1/2 <b, x*>.
GeneratedProblem gen_sparse_spd(const GeneratorSpec& spec);

/// m x n A (m >= n) whose top n x n block is column diagonally dominant, so A
/// has full column rank; x* >= 0, b = A x*, fstar = 0.
GeneratedProblem gen_planted_ls(const GeneratorSpec& spec);

/// A = I - diag(lambda) with lambda_1..lambda_{n-1} uniform in value_range and
/// lambda_n = value_range.second; b = e_1. Simple iteration uses I - A.
GeneratedProblem gen_kk_diagonal(const GeneratorSpec& spec);

GeneratedProblem generate(const GeneratorSpec& spec);

/// ceil(n^0.4), at most n: the default sparsity cap, keeping s well below sqrt(n).
std::size_t default_sparsity(std::size_t n);

/// Eigenvalues of the simple-iteration matrix I - A for a kk_diagonal instance.
Vector kk_spectrum(const SparseMatrix& a);

}  // namespace sparseopt
