#include "sparseopt/rand_strong.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail.hpp"

namespace sparseopt {

namespace {

double triangular(std::uint64_t k) {
  const double kd = static_cast<double>(k);
  return 0.5 * kd * (kd + 1.0);
}

double require_mu(const QuadraticProblem& problem) {
  if (!problem.mu || !(*problem.mu > 0.0)) {
    throw std::invalid_argument("randomized method needs a positive mu");
  }
  return *problem.mu;
}

void reset_anchor(RscState& s) {
  s.k = 1;
  for (std::size_t i : s.e_support) {
    s.e[i] = 0.0;
    s.in_e_support[i] = 0;
  }
  s.e_support.clear();
  s.x1 = s.grad.x;
  const double l1 = s.grad.l1_norm();
  s.g1_l1_sq = l1 * l1;
  s.max_g_l1_sq = s.g1_l1_sq;
}

}  // namespace

RscState rsc_init(const QuadraticProblem& problem, Vector x1) {
  require_mu(problem);
  RscState s;
  s.grad = grad_init(problem, std::move(x1), IndexKind::sum_tree);
  s.e.assign(problem.dim(), 0.0);
  s.in_e_support.assign(problem.dim(), 0);
  reset_anchor(s);
  return s;
}

RscMove rsc_move(const RscState& s, double mu, double u) {
  const SumTree& tree = *s.grad.tree;
  const std::size_t i = tree.sample(u);
  const double gi = s.grad.g[i];
  const double sign = gi > 0.0 ? 1.0 : (gi < 0.0 ? -1.0 : 0.0);
  const double step = 2.0 / (mu * static_cast<double>(s.k + 1));
  return {i, -step * tree.total() * sign};
}

bool rsc_step(RscState& s, const QuadraticProblem& problem, double u) {
  const double mu = require_mu(problem);
  if (!(s.grad.tree->total() > 0.0)) return false;
  const RscMove move = rsc_move(s, mu, u);
  coord_step(s.grad, problem, move.coordinate, move.delta);
  if (!s.in_e_support[move.coordinate]) {
    s.in_e_support[move.coordinate] = 1;
    s.e_support.push_back(move.coordinate);
  }
  s.e[move.coordinate] += triangular(s.k) * move.delta;
  ++s.k;
  ++s.inner_total;
  const double l1 = s.grad.l1_norm();
  s.max_g_l1_sq = std::max(s.max_g_l1_sq, l1 * l1);
  return true;
}

Vector rsc_average(const RscState& s) {
  if (s.k == 0) throw std::logic_error("rsc_average before the first iterate");
  Vector y = s.grad.x;
  const double t = triangular(s.k);
  for (std::size_t i : s.e_support) y[i] -= s.e[i] / t;
  return y;
}

RestartDecision rsc_check_restart(RscState& s, const QuadraticProblem& problem, double eps) {
  const double mu = require_mu(problem);
  Vector y = rsc_average(s);
  const Vector gy = problem.gradient(y);
  s.grad.work.refresh_entries_touched += problem.a.nnz() + y.size();
  const double l2 = norm2(gy);
  const double l1 = norm1(gy);
  if (l2 * l2 <= 2.0 * mu * eps) return RestartDecision::converged;
  if (l1 * l1 <= 0.5 * s.g1_l1_sq) {
    const WorkCounters work = s.grad.work;
    const std::size_t period = s.grad.refresh_period;
    s.grad = grad_init(problem, std::move(y), IndexKind::sum_tree, period);
    s.grad.work = work;
    s.grad.work.refresh_entries_touched += problem.a.nnz() + s.grad.x.size();
    reset_anchor(s);
    ++s.restarts;
    return RestartDecision::restart;
  }
  return RestartDecision::keep_going;
}

RscReport rsc_solve(const QuadraticProblem& problem, const RscOptions& opt) {
  problem.validate();
  const double mu = require_mu(problem);
  if (!(opt.eps > 0.0)) throw std::invalid_argument("rsc_solve: eps must be positive");
  detail::Stopwatch clock;

  RscState s = rsc_init(problem);
  s.grad.refresh_period = opt.refresh_period;
  const std::size_t n = problem.dim();
  const std::size_t cadence = opt.check_every ? opt.check_every : std::max<std::size_t>(1, n);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double below_one = std::nextafter(1.0, 0.0);

  RscReport out;
  SolveReport& report = out.report;
  report.method = "rsc";

  Vector best_y;
  double best_l2 = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::budget_exhausted;

  auto check = [&]() {
    const double max_l1_sq = s.max_g_l1_sq;
    const std::uint64_t k = s.k;
    Vector y = rsc_average(s);
    const RestartDecision d = rsc_check_restart(s, problem, opt.eps);
    const Vector gy = problem.gradient(y);
    RscCheck c;
    c.inner_total = s.inner_total;
    c.f_y = problem.objective(y);
    c.grad_y_l2 = norm2(gy);
    c.grad_y_l1 = norm1(gy);
    c.max_grad_l1_sq = max_l1_sq;
    c.k = k;
    c.decision = d;
    out.checks.push_back(c);
    const double gap = problem.known_fstar ? c.f_y - *problem.known_fstar
                                           : c.grad_y_l2 * c.grad_y_l2 / (2.0 * mu);
    report.trace.push_back(
        detail::make_row(s.inner_total, c.f_y, c.grad_y_l2, gap, s.grad.work, clock));
    if (c.grad_y_l2 < best_l2) {
      best_l2 = c.grad_y_l2;
      best_y = std::move(y);
    }
    return d;
  };

  if (check() == RestartDecision::converged) status = SolveStatus::converged;
  std::size_t since_check = 0;
  while (status != SolveStatus::converged && s.inner_total < opt.budget) {
    const double u = std::min(unif(rng), below_one);
    if (!rsc_step(s, problem, u)) {
      // g(x^k) = 0: x^k itself is the minimizer.
      best_y = s.grad.x;
      status = SolveStatus::converged;
      break;
    }
    if (++since_check >= cadence) {
      since_check = 0;
      if (check() == RestartDecision::converged) status = SolveStatus::converged;
    }
  }

  // On convergence the last check's y is the best one by construction.
  const Vector gy = problem.gradient(best_y);
  report.status = status;
  report.iterations = s.inner_total;
  report.restarts = s.restarts;
  report.final_f = problem.objective(best_y);
  report.final_residual2 = norm2(gy);
  report.final_gap = report.final_residual2;
  report.work = s.grad.work;
  report.wall_ms = clock.elapsed_ms();
  report.x = std::move(best_y);
  return out;
}

}  // namespace sparseopt
