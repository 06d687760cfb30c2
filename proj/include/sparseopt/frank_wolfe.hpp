#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sparseopt/greedy.hpp"
#include "sparseopt/index_structs.hpp"
#include "sparseopt/report.hpp"
#include "sparseopt/sparse_matrix.hpp"

namespace sparseopt {

enum class FwSchedule {
  classic,  // gamma_k = 2/(k+1); the first step lands on the first vertex
  shifted,  // gamma_k = 2/(k+2)
};

struct FwConfig {
  FwSchedule schedule = FwSchedule::shifted;
  double r0 = 1.0;
  double chi = std::sqrt(2.0);
  double eps = 1e-6;
  std::size_t max_outer_restarts = 40;
  /// Iteration cap for one radius; the restart driver uses
  /// min(N(R), max_iters_per_r).
  std::size_t max_iters_per_r = 100'000'000;
  /// z is folded back into x once ||z||_inf exceeds this.
  double renorm_threshold = 1e12;
  /// Above this many nonzeros in the linear term the argmin is found by a
  /// full scan instead of the heap. Zero selects s_col^2 of the matrix.
  std::size_t dense_b_threshold = 0;
  std::size_t trace_every = 100;
};

/// The sparse representation of one Frank-Wolfe run: x = beta * z with
/// p = Qz, q = <Qz, z>, r = <c, z>, where Q, c are the quadratic and linear
/// parts of the objective (Q = A, c = b for the quadratic; Q = A^T A,
/// c = A^T b for least squares).
struct FwState {
  Vector z;
  std::vector<std::size_t> support;  // coordinates with z_i != 0 ever set
  double beta = 1.0;
  std::uint64_t k = 1;  // index of the current iterate x^k
  Vector p;
  double q = 0.0;
  double r = 0.0;
  double constant = 0.0;  // 1/2 ||b||^2 for least squares
  double R = 1.0;
  std::optional<IndexedHeap> heap;  // min order over p_i - c_i / beta
  double f = 0.0;                   // f(x^k)
  double best_f = 0.0;              // min_k f(x^k)
  double best_lb = 0.0;             // max_k f(x^k) + <grad f(x^k), y^k - x^k>
  double best_lb_next = 0.0;        // same lower bounds taken over S(chi R)
  double gap = 0.0;                 // best_f - best_lb
  double min_partial = 0.0;         // smallest df/dx_i at x^k
  std::optional<std::size_t> vertex;  // y^k = R e_vertex, or zero
  WorkCounters work;
  std::size_t renormalizations = 0;
  bool nonconvex_detected = false;

  /// x = beta * z, O(n).
  Vector materialize() const;
};

/// A vertex of S(R) = {x >= 0, sum x <= R}: zero, or R e_index.
struct FwVertex {
  std::optional<std::size_t> index;
  double scale = 0.0;
};

/// Linear minimization over S(R) given the partial derivatives: R e_i* when
/// the smallest derivative (smallest index on ties) is strictly negative,
/// else the zero vertex.
FwVertex fw_vertex(std::span<const double> partials, double R);

/// Certificate gap f_now - best_lb.
double fw_gap(const FwState& state, double f_now);

/// Least squares on the orthant: f(x) = 1/2 ||Ax - b||^2, A m x n.
struct LeastSquaresProblem {
  SparseMatrix a;
  Vector b;
  std::optional<double> known_fstar;

  std::size_t dim() const { return a.n_cols(); }
  double objective(std::span<const double> x) const;
};

using FwObserver = std::function<void(const FwState&)>;

struct FwResult {
  SolveReport report;
  FwState state;
};

/// Frank-Wolfe on the orthant problem restricted to S(R), started at x = 0.
/// Stops when the certificate for the current iterate drops to eps (or
/// f - f* <= eps when the optimal value is known) or after
/// cfg.max_iters_per_r steps. The observer sees every iterate x^k. The report's
/// a_priori_iterations holds N(R).
FwResult fw_solve_fixed_R(const QuadraticProblem& problem, double R, const FwConfig& cfg,
                          const FwObserver& observer = {});
FwResult fw_solve_fixed_R(const LeastSquaresProblem& problem, double R, const FwConfig& cfg,
                          const FwObserver& observer = {});

/// N(R) = ceil(8 L1 R^2 / eps).
std::size_t fw_budget(double l1, double R, double eps);

struct FwRestartReport {
  SolveReport report;
  std::vector<double> radii;     // every radius attempted
  std::uint64_t budget_total = 0;  // sum of N(R) over attempted radii
  double final_radius = 0.0;
};

/// Radius restarts: R = r0, chi r0, chi^2 r0, ... until the certificate
/// closes within the budget N(R). The report's a_priori_iterations holds
/// budget_total.
FwRestartReport fw_solve_restarts(const QuadraticProblem& problem, const FwConfig& cfg);
FwRestartReport fw_least_squares(const LeastSquaresProblem& problem, const FwConfig& cfg);

/// beta_k for the given schedule in closed form.
double fw_beta_closed_form(FwSchedule schedule, std::uint64_t k);

}  // namespace sparseopt
