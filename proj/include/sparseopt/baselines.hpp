#pragma once

#include <cstdint>
#include <vector>

#include "sparseopt/greedy.hpp"
#include "sparseopt/report.hpp"
#include "sparseopt/sparse_matrix.hpp"

namespace sparseopt {

struct CgOptions {
  double tol = 1e-8;
  std::size_t max_iters = 0;  // zero means n
  std::size_t trace_every = 1;
};

/// Conjugate gradients for Ax = b, A symmetric PSD, from x = 0. Stops at
/// ||Ax - b||_2 <= tol. A zero or negative curvature direction is reported as
/// breakdown.
SolveReport cg_solve(const SparseMatrix& a, const Vector& b, const CgOptions& options);

struct SimpleIterationResult {
  Vector x;
  std::uint64_t hitting_time = 0;  // first N with ||delta^N||_2 <= eps
  bool converged = false;
  std::vector<double> delta_norms;  // ||delta^k||_2 for k = 0..N
};

/// I - A for square A.
SparseMatrix identity_minus(const SparseMatrix& a);

/// x^{k+1} = A_tilde x^k + b until delta^k = b - (I - A_tilde) x^k is within eps
/// in the 2-norm. An empty x0 means zero.
SimpleIterationResult simple_iteration(const SparseMatrix& a_tilde, const Vector& b, double eps,
                                       Vector x0, std::size_t max_iters);

/// Simple iteration for Ax = b with A_tilde = I - A, from x = 0, reported like
/// the other solvers (residual2 and gap both carry ||Ax - b||_2).
SolveReport simple_iteration_solve(const QuadraticProblem& problem, double eps,
                                   std::size_t max_iters, std::size_t trace_every = 100);

struct KkExperimentSpec {
  std::vector<double> eigenvalues;  // spectrum of A_tilde, ascending in (0, 1)
  double eps = 1e-3;
  double ball_radius = 1e8;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::size_t max_iters = 10'000'000;

  void validate() const;
};

struct KkTrial {
  std::uint64_t hitting_time = 0;
  double error = 0.0;  // ||x^N - x*||_2
  double lower = 0.0;  // 0.999 eps lambda_n / (1 - lambda_n)
  double upper = 0.0;  // eps / (1 - lambda_n)
  bool converged = false;
  bool in_bracket() const { return converged && lower <= error && error <= upper; }
};

struct KkReport {
  double fraction_in_bracket = 0.0;
  std::size_t upper_violations = 0;
  std::vector<KkTrial> trials;
};

/// Simple iteration on A_tilde = diag(eigenvalues), b = e_0, from starting
/// points uniform in the 2-ball of the given radius, recording the solution
/// error at the stopping time against the residual bracket.
KkReport kk_experiment(const KkExperimentSpec& spec);

/// Uniform point in the n-dimensional 2-ball of the given radius.
template <class Rng>
Vector sample_ball(std::size_t n, double radius, Rng& rng);

}  // namespace sparseopt

#include <cmath>
#include <random>

namespace sparseopt {

template <class Rng>
Vector sample_ball(std::size_t n, double radius, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(n);
  double nv = 0.0;
  do {
    for (auto& vi : v) vi = gauss(rng);
    nv = norm2(v);
  } while (nv == 0.0);
  const double scale = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n)) / nv;
  for (auto& vi : v) vi *= scale;
  return v;
}

}  // namespace sparseopt
