#include "sparseopt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "detail.hpp"

namespace sparseopt {

SolveReport cg_solve(const SparseMatrix& a, const Vector& b, const CgOptions& opt) {
  if (!a.symmetric()) throw std::invalid_argument("cg_solve: matrix is not symmetric");
  if (b.size() != a.n_rows()) throw std::invalid_argument("cg_solve: rhs length mismatch");
  detail::Stopwatch clock;
  const std::size_t n = b.size();
  const std::size_t max_iters = opt.max_iters ? opt.max_iters : n;

  SolveReport report;
  report.method = "cg";
  Vector x(n, 0.0);
  Vector r = b;  // r = b - Ax
  Vector p = r;
  double rr = dot(r, r);
  double f = 0.0;  // 1/2 x^T A x - b^T x = -1/2 b^T x + 1/2 x^T(Ax - b)

  auto push_row = [&](std::uint64_t k) {
    report.trace.push_back(detail::make_row(k, f, std::sqrt(rr), std::sqrt(rr), report.work, clock));
  };
  push_row(0);

  std::uint64_t k = 0;
  report.status = SolveStatus::budget_exhausted;
  while (true) {
    if (std::sqrt(rr) <= opt.tol) {
      report.status = SolveStatus::converged;
      break;
    }
    if (k >= max_iters) break;
    const Vector ap = multiply(a, p);
    report.work.grad_entries_touched += a.nnz();
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0)) {
      report.status = SolveStatus::breakdown;
      report.notes.push_back("nonpositive_curvature");
      break;
    }
    const double alpha = rr / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    ++k;
    // Ax - b = -r
    f = -0.5 * dot(b, x) - 0.5 * dot(x, r);
    if (detail::trace_due(k, opt.trace_every)) push_row(k);
  }

  Vector res = multiply(a, x);
  for (std::size_t i = 0; i < n; ++i) res[i] -= b[i];
  report.iterations = k;
  report.final_residual2 = norm2(res);
  report.final_gap = report.final_residual2;
  report.final_f = 0.5 * dot(x, res) - 0.5 * dot(b, x);
  report.wall_ms = clock.elapsed_ms();
  detail::close_trace(report, detail::make_row(k, report.final_f, report.final_residual2,
                                               report.final_gap, report.work, clock));
  report.x = std::move(x);
  return report;
}

SparseMatrix identity_minus(const SparseMatrix& a) {
  if (a.n_rows() != a.n_cols()) throw std::invalid_argument("identity_minus: not square");
  std::vector<Triple> triples;
  std::vector<char> has_diag(a.n_rows(), 0);
  for (const Triple& t : a.triples()) {
    if (t.row == t.col) {
      has_diag[t.row] = 1;
      triples.push_back({t.row, t.col, 1.0 - t.value});
    } else {
      triples.push_back({t.row, t.col, -t.value});
    }
  }
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    if (!has_diag[i]) triples.push_back({i, i, 1.0});
  }
  return SparseMatrix::build(std::move(triples), a.n_rows(), a.n_cols(), a.symmetric());
}

namespace {

enum class Outcome { converged, budget, diverged };

// Runs x^{k+1} = x^k + delta^k, calling visit(k, x^k, delta^k, ||delta^k||_2)
// before each step. Returns k at exit and why it stopped.
template <class Visit>
std::pair<std::uint64_t, Outcome> iterate(const SparseMatrix& a_tilde, const Vector& b, double eps,
                                       Vector& x, std::size_t max_iters, Visit&& visit) {
  const std::size_t n = b.size();
  if (a_tilde.n_rows() != n || a_tilde.n_cols() != n) {
    throw std::invalid_argument("simple_iteration: dimension mismatch");
  }
  if (x.empty()) x.assign(n, 0.0);
  if (x.size() != n) throw std::invalid_argument("simple_iteration: x0 length mismatch");
  if (!(eps > 0.0)) throw std::invalid_argument("simple_iteration: eps must be positive");
  Vector delta(n);
  for (std::uint64_t k = 0;; ++k) {
    const Vector ax = multiply(a_tilde, x);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = ax[i] + b[i] - x[i];
      d2 += delta[i] * delta[i];
    }
    const double dn = std::sqrt(d2);
    visit(k, x, delta, dn);
    if (dn <= eps) return {k, Outcome::converged};
    if (!std::isfinite(dn)) return {k, Outcome::diverged};
    if (k >= max_iters) return {k, Outcome::budget};
    for (std::size_t i = 0; i < n; ++i) x[i] += delta[i];
  }
}

}  // namespace

SimpleIterationResult simple_iteration(const SparseMatrix& a_tilde, const Vector& b, double eps,
                                       Vector x0, std::size_t max_iters) {
  SimpleIterationResult out;
  out.x = std::move(x0);
  const auto [k, outcome] =
      iterate(a_tilde, b, eps, out.x, max_iters,
              [&](std::uint64_t, const Vector&, const Vector&, double dn) {
                out.delta_norms.push_back(dn);
              });
  out.hitting_time = k;
  out.converged = outcome == Outcome::converged;
  return out;
}

SolveReport simple_iteration_solve(const QuadraticProblem& problem, double eps,
                                   std::size_t max_iters, std::size_t trace_every) {
  problem.validate();
  detail::Stopwatch clock;
  const SparseMatrix a_tilde = identity_minus(problem.a);
  SolveReport report;
  report.method = "simple_iter";
  Vector x;
  double f = 0.0;
  double dn_last = 0.0;
  const auto [k, outcome] = iterate(
      a_tilde, problem.b, eps, x, max_iters,
      [&](std::uint64_t k, const Vector& xk, const Vector& delta, double dn) {
        // Ax - b = -delta, so f = 1/2 <x, Ax> - <b, x> = -1/2 <x, b + delta>.
        f = 0.0;
        for (std::size_t i = 0; i < xk.size(); ++i) f -= 0.5 * xk[i] * (problem.b[i] + delta[i]);
        dn_last = dn;
        if (k > 0) report.work.grad_entries_touched += a_tilde.nnz();
        if (detail::trace_due(k, trace_every)) {
          report.trace.push_back(detail::make_row(k, f, dn, dn, report.work, clock));
        }
      });
  switch (outcome) {
    case Outcome::converged: report.status = SolveStatus::converged; break;
    case Outcome::budget: report.status = SolveStatus::budget_exhausted; break;
    case Outcome::diverged:
      report.status = SolveStatus::breakdown;
      report.notes.push_back("diverged");
      break;
  }
  report.iterations = k;
  report.final_f = f;
  report.final_residual2 = dn_last;
  report.final_gap = dn_last;
  report.wall_ms = clock.elapsed_ms();
  detail::close_trace(report, detail::make_row(k, f, dn_last, dn_last, report.work, clock));
  report.x = std::move(x);
  return report;
}

void KkExperimentSpec::validate() const {
  if (eigenvalues.empty()) throw std::invalid_argument("kk: empty spectrum");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues[i] > 0.0 && eigenvalues[i] < 1.0)) {
      throw std::invalid_argument("kk: eigenvalues must lie in (0, 1)");
    }
    if (i > 0 && eigenvalues[i] < eigenvalues[i - 1]) {
      throw std::invalid_argument("kk: eigenvalues must be ascending");
    }
  }
  if (!(eps > 0.0)) throw std::invalid_argument("kk: eps must be positive");
  if (!(ball_radius > 0.0)) throw std::invalid_argument("kk: radius must be positive");
  if (trials == 0) throw std::invalid_argument("kk: at least one trial");
}

KkReport kk_experiment(const KkExperimentSpec& spec) {
  spec.validate();
  const std::size_t n = spec.eigenvalues.size();
  std::vector<Triple> diag;
  for (std::size_t i = 0; i < n; ++i) diag.push_back({i, i, spec.eigenvalues[i]});
  const SparseMatrix a_tilde = SparseMatrix::build(std::move(diag), n, n, true);
  Vector b(n, 0.0);
  b[0] = 1.0;
  Vector x_star(n);
  for (std::size_t i = 0; i < n; ++i) x_star[i] = b[i] / (1.0 - spec.eigenvalues[i]);

  const double lambda_n = spec.eigenvalues.back();
  const double lower = 0.999 * spec.eps * lambda_n / (1.0 - lambda_n);
  const double upper = spec.eps / (1.0 - lambda_n);

  std::mt19937_64 rng(spec.seed);
  KkReport report;
  std::size_t inside = 0;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    Vector x0 = sample_ball(n, spec.ball_radius, rng);
    SimpleIterationResult run = simple_iteration(a_tilde, b, spec.eps, std::move(x0), spec.max_iters);
    KkTrial trial;
    trial.hitting_time = run.hitting_time;
    trial.converged = run.converged;
    double e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = run.x[i] - x_star[i];
      e2 += d * d;
    }
    trial.error = std::sqrt(e2);
    trial.lower = lower;
    trial.upper = upper;
    if (trial.converged && trial.error > upper) ++report.upper_violations;
    if (trial.in_bracket()) ++inside;
    report.trials.push_back(trial);
  }
  report.fraction_in_bracket = static_cast<double>(inside) / static_cast<double>(spec.trials);
  return report;
}

}  // namespace sparseopt
