#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sparseopt/index_structs.hpp"
#include "sparseopt/report.hpp"
#include "sparseopt/sparse_matrix.hpp"

namespace sparseopt {

/// f(x) = 1/2 <Ax, x> - <b, x> with A symmetric PSD.
struct QuadraticProblem {
  SparseMatrix a;
  Vector b;
  std::optional<double> known_fstar;
  /// Strong-convexity modulus, a lower bound on lambda_min(A).
  std::optional<double> mu;

  std::size_t dim() const { return a.n_cols(); }
  /// Throws std::invalid_argument when the data violate the problem contract.
  void validate() const;
  double objective(std::span<const double> x) const;
  Vector gradient(std::span<const double> x) const;
};

/// A family of scalar functions phi_k(t) indexed by k, with a uniform bound on
/// |phi_k''| along the trajectory (the caller's contract).
struct ScalarFamily {
  std::function<double(std::size_t, double)> value;
  std::function<double(std::size_t, double)> derivative;
  double curvature = 0.0;

  static ScalarFamily zero();
  /// phi_k(t) = weight/2 * t^2
  static ScalarFamily half_square(double weight = 1.0);
  /// phi_k(t) = 1/2 (t - target_k)^2
  static ScalarFamily squared_residual(Vector target);
};

/// f(x) = sum_k outer_k(A_k^T x) + sum_i separable_i(x_i), A being m x n.
struct CompositeProblem {
  SparseMatrix a;
  ScalarFamily outer;
  ScalarFamily separable;
  /// Replaces the default step constant L_f * max_i ||A^(i)||^2 + L_g.
  std::optional<double> step_override;
  std::optional<double> known_fstar;

  std::size_t dim() const { return a.n_cols(); }
  double step_constant() const;
  double objective(std::span<const double> x) const;
  Vector gradient(std::span<const double> x) const;
};

enum class IndexKind { heap, sum_tree };

/// Iterate plus every cache a single-coordinate step keeps current:
/// g = grad f(x), u = Ax, the index structure keyed by |g_i|, f(x) itself.
struct GradientState {
  Vector x;
  Vector g;
  Vector u;
  Vector outer_value;  // composite: outer_k(u_k)
  Vector outer_deriv;  // composite: outer_k'(u_k)
  Vector diag;         // quadratic: A_ii
  std::optional<IndexedHeap> heap;  // max order over |g_i|
  std::optional<SumTree> tree;      // weights |g_i|
  double f = 0.0;
  double l1_norm_g = 0.0;
  WorkCounters work;
  std::size_t refresh_period = 16384;
  std::size_t steps_since_refresh = 0;
  /// Largest ||g_incremental - g_scratch||_inf / (1 + ||g_scratch||_inf) seen
  /// at any refresh so far.
  double max_refresh_deviation = 0.0;
  std::size_t refresh_count = 0;

  /// ||g||_1; the sum-tree total when a tree is maintained.
  double l1_norm() const { return tree ? tree->total() : l1_norm_g; }

  // Scratch for deduplicating touched coordinates in composite steps.
  std::vector<std::size_t> touched;
  std::vector<char> marked;
};

GradientState grad_init(const QuadraticProblem& problem, Vector x0,
                        IndexKind kind = IndexKind::heap, std::size_t refresh_period = 16384);
GradientState grad_init(const CompositeProblem& problem, Vector x0,
                        IndexKind kind = IndexKind::heap, std::size_t refresh_period = 16384);

/// x_i += delta with incremental maintenance of every cache. For the
/// quadratic only column i of A is read; for the composite, the rows meeting
/// column i. A full refresh runs every refresh_period steps.
void coord_step(GradientState& state, const QuadraticProblem& problem, std::size_t i,
                double delta);
void coord_step(GradientState& state, const CompositeProblem& problem, std::size_t i,
                double delta);

/// Recomputes u, g, f and the index keys from scratch and records the drift.
void refresh(GradientState& state, const QuadraticProblem& problem);
void refresh(GradientState& state, const CompositeProblem& problem);

struct StopRule {
  std::size_t max_iters = 1'000'000;
  std::optional<double> grad_inf_tol;
  std::optional<double> fgap_tol;  // needs known_fstar
  std::optional<std::chrono::duration<double>> wall_clock_limit;
};

struct StepInfo {
  std::uint64_t k = 0;  // iterations completed after this step
  std::size_t coordinate = 0;
  double partial = 0.0;  // df/dx_i before the step
  double delta = 0.0;
  double f_before = 0.0;
};

using StepObserver = std::function<void(const GradientState&, const StepInfo&)>;

struct GreedyOptions {
  StopRule stop;
  std::size_t refresh_period = 16384;
  std::size_t trace_every = 100;
  /// When set (and fgap_tol is set), the report carries N = 2 L R1^2 / eps.
  std::optional<double> r1;
  StepObserver observer;
};

/// Gauss-Southwell descent with step 1/L at argmax |g_i|, L = max |A_ij|.
/// An empty x0 means the zero vector.
SolveReport solve_greedy(const QuadraticProblem& problem, Vector x0,
                         const GreedyOptions& options);

/// Same iteration on a composite objective with step 1/M, M = step_constant().
SolveReport solve_greedy_composite(const CompositeProblem& problem, Vector x0,
                                   const GreedyOptions& options);

/// sqrt(2 lambda_max fgap): bound on ||Ax - b||_2 when f(x) - f* <= fgap.
double residual_bound(double fgap, double lambda_max);

}  // namespace sparseopt
