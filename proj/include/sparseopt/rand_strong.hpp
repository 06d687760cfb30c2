#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sparseopt/greedy.hpp"
#include "sparseopt/report.hpp"

namespace sparseopt {

/// Randomized single-coordinate method for mu-strongly convex quadratics.
///
/// Step k samples i with probability |g_i| / ||g||_1 and moves x_i by
/// -(2 / (mu (k+1))) ||g||_1 sign(g_i), an unbiased estimate of
/// -(2 / (mu (k+1))) g. The output point is the weighted average
/// y^N = (2 / (N (N+1))) sum_k k x^k, kept lazily as y^N = x^N - E / T_N with
/// T_k = k (k+1) / 2 and E = sum_r T_r d_r over the displacements d_r.
struct RscState {
  GradientState grad;  // sum-tree indexed
  std::uint64_t k = 1;  // index of the current iterate x^k
  Vector e;             // the accumulator E, dense storage
  std::vector<std::size_t> e_support;
  std::vector<char> in_e_support;
  Vector x1;  // restart anchor
  double g1_l1_sq = 0.0;
  double max_g_l1_sq = 0.0;  // max_k ||grad f(x^k)||_1^2 since the anchor
  std::uint64_t restarts = 0;
  std::uint64_t inner_total = 0;
};

enum class RestartDecision { keep_going, restart, converged };

RscState rsc_init(const QuadraticProblem& problem, Vector x1 = {});

/// One sampled step using u in [0, 1) for the draw. Returns false, taking no
/// step, when ||g||_1 = 0 (x is already stationary).
bool rsc_step(RscState& state, const QuadraticProblem& problem, double u);

/// Coordinate the draw u selects and the step it implies at the current k.
struct RscMove {
  std::size_t coordinate = 0;
  double delta = 0.0;
};
RscMove rsc_move(const RscState& state, double mu, double u);

/// y^N = x^N - E / T_N in O(n + |supp E|).
Vector rsc_average(const RscState& state);

/// Computes grad f(y) from scratch. Converged when ||grad f(y)||_2^2 <= 2 mu eps
/// (so f(y) - f* <= eps); restarts from y when ||grad f(y)||_1^2 is at most
/// half of ||grad f(x^1)||_1^2.
RestartDecision rsc_check_restart(RscState& state, const QuadraticProblem& problem, double eps);

struct RscCheck {
  std::uint64_t inner_total = 0;
  double f_y = 0.0;
  double grad_y_l2 = 0.0;
  double grad_y_l1 = 0.0;
  double max_grad_l1_sq = 0.0;  // max_k ||grad f(x^k)||_1^2 since the last anchor
  std::uint64_t k = 0;
  RestartDecision decision = RestartDecision::keep_going;
};

struct RscOptions {
  double eps = 1e-6;
  std::uint64_t seed = 0;
  std::uint64_t budget = 100'000'000;  // inner iterations over all restarts
  /// Restart-check cadence; zero means the dimension n.
  std::size_t check_every = 0;
  std::size_t refresh_period = 16384;
};

struct RscReport {
  SolveReport report;
  std::vector<RscCheck> checks;
};

RscReport rsc_solve(const QuadraticProblem& problem, const RscOptions& options);

}  // namespace sparseopt
