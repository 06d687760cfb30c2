#include "sparseopt/greedy.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "detail.hpp"

namespace sparseopt {

WorkCounters& WorkCounters::operator+=(const WorkCounters& o) {
  grad_entries_touched += o.grad_entries_touched;
  index_updates += o.index_updates;
  heap_ops += o.heap_ops;
  tree_ops += o.tree_ops;
  full_refreshes += o.full_refreshes;
  refresh_entries_touched += o.refresh_entries_touched;
  return *this;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::budget_exhausted: return "budget_exhausted";
    case SolveStatus::breakdown: return "breakdown";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Problems

void QuadraticProblem::validate() const {
  if (!a.symmetric()) throw std::invalid_argument("quadratic problem needs a symmetric matrix");
  if (b.size() != a.n_rows()) {
    throw std::invalid_argument("rhs length " + std::to_string(b.size()) + " != matrix order " +
                                std::to_string(a.n_rows()));
  }
  if (mu && !(*mu > 0.0)) throw std::invalid_argument("mu must be positive");
}

double QuadraticProblem::objective(std::span<const double> x) const {
  const Vector ax = multiply(a, x);
  return 0.5 * dot(ax, x) - dot(b, x);
}

Vector QuadraticProblem::gradient(std::span<const double> x) const {
  Vector g = multiply(a, x);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= b[i];
  return g;
}

ScalarFamily ScalarFamily::zero() {
  return {[](std::size_t, double) { return 0.0; }, [](std::size_t, double) { return 0.0; }, 0.0};
}

ScalarFamily ScalarFamily::half_square(double weight) {
  return {[weight](std::size_t, double t) { return 0.5 * weight * t * t; },
          [weight](std::size_t, double t) { return weight * t; }, std::abs(weight)};
}

ScalarFamily ScalarFamily::squared_residual(Vector target) {
  auto shared = std::make_shared<const Vector>(std::move(target));
  return {[shared](std::size_t k, double t) {
            const double r = t - (*shared)[k];
            return 0.5 * r * r;
          },
          [shared](std::size_t k, double t) { return t - (*shared)[k]; }, 1.0};
}

double CompositeProblem::step_constant() const {
  if (step_override) return *step_override;
  return outer.curvature * a.max_col_sqnorm() + separable.curvature;
}

double CompositeProblem::objective(std::span<const double> x) const {
  const Vector u = multiply(a, x);
  double f = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) f += outer.value(k, u[k]);
  for (std::size_t i = 0; i < x.size(); ++i) f += separable.value(i, x[i]);
  return f;
}

Vector CompositeProblem::gradient(std::span<const double> x) const {
  const Vector u = multiply(a, x);
  Vector d(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) d[k] = outer.derivative(k, u[k]);
  Vector g = multiply_transpose(a, d);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += separable.derivative(i, x[i]);
  return g;
}

// ---------------------------------------------------------------------------
// Gradient state

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string("oracle returned non-finite ") + what);
}

void prepare_x0(Vector& x0, std::size_t n) {
  if (x0.empty()) x0.assign(n, 0.0);
  if (x0.size() != n) {
    throw std::invalid_argument("x0 length " + std::to_string(x0.size()) + " != dimension " +
                                std::to_string(n));
  }
}

void build_index(GradientState& s, IndexKind kind) {
  Vector keys(s.g.size());
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = std::abs(s.g[i]);
  s.l1_norm_g = norm1(s.g);
  if (kind == IndexKind::heap) {
    s.heap.emplace(keys, HeapOrder::max);
  } else {
    s.tree.emplace(keys);
  }
}

void rebuild_index(GradientState& s) {
  Vector keys(s.g.size());
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = std::abs(s.g[i]);
  s.l1_norm_g = norm1(s.g);
  if (s.heap) s.heap->rebuild(keys);
  if (s.tree) s.tree->rebuild(keys);
}

// Pushes |g_j| into whichever index structure is maintained.
void update_key(GradientState& s, std::size_t j, double old_g) {
  const double key = std::abs(s.g[j]);
  s.l1_norm_g += key - std::abs(old_g);
  ++s.work.index_updates;
  if (s.heap) {
    const auto before = s.heap->touched();
    s.heap->update(j, key);
    s.work.heap_ops += s.heap->touched() - before;
  }
  if (s.tree) {
    const auto before = s.tree->touched();
    s.tree->update(j, key);
    s.work.tree_ops += s.tree->touched() - before;
  }
}

void record_deviation(GradientState& s, const Vector& g_scratch) {
  double dev = 0.0;
  for (std::size_t i = 0; i < g_scratch.size(); ++i) {
    dev = std::max(dev, std::abs(s.g[i] - g_scratch[i]));
  }
  dev /= 1.0 + norm_inf(g_scratch);
  s.max_refresh_deviation = std::max(s.max_refresh_deviation, dev);
  ++s.refresh_count;
}

}  // namespace

GradientState grad_init(const QuadraticProblem& problem, Vector x0, IndexKind kind,
                        std::size_t refresh_period) {
  problem.validate();
  prepare_x0(x0, problem.dim());
  GradientState s;
  s.x = std::move(x0);
  s.u = multiply(problem.a, s.x);
  s.g = s.u;
  for (std::size_t i = 0; i < s.g.size(); ++i) s.g[i] -= problem.b[i];
  s.diag = problem.a.diagonal();
  s.f = 0.5 * dot(s.u, s.x) - dot(problem.b, s.x);
  s.refresh_period = refresh_period;
  build_index(s, kind);
  return s;
}

GradientState grad_init(const CompositeProblem& problem, Vector x0, IndexKind kind,
                        std::size_t refresh_period) {
  prepare_x0(x0, problem.dim());
  GradientState s;
  s.x = std::move(x0);
  s.refresh_period = refresh_period;
  s.u = multiply(problem.a, s.x);
  const std::size_t m = s.u.size();
  s.outer_value.resize(m);
  s.outer_deriv.resize(m);
  s.f = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    s.outer_value[k] = problem.outer.value(k, s.u[k]);
    s.outer_deriv[k] = problem.outer.derivative(k, s.u[k]);
    check_finite(s.outer_value[k], "outer value");
    check_finite(s.outer_deriv[k], "outer derivative");
    s.f += s.outer_value[k];
  }
  s.g = multiply_transpose(problem.a, s.outer_deriv);
  for (std::size_t i = 0; i < s.g.size(); ++i) {
    const double gv = problem.separable.value(i, s.x[i]);
    const double gd = problem.separable.derivative(i, s.x[i]);
    check_finite(gv, "separable value");
    check_finite(gd, "separable derivative");
    s.f += gv;
    s.g[i] += gd;
  }
  s.marked.assign(s.g.size(), 0);
  build_index(s, kind);
  return s;
}

void refresh(GradientState& s, const QuadraticProblem& problem) {
  s.u = multiply(problem.a, s.x);
  Vector g = s.u;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= problem.b[i];
  record_deviation(s, g);
  s.g = std::move(g);
  s.f = 0.5 * dot(s.u, s.x) - dot(problem.b, s.x);
  rebuild_index(s);
  s.steps_since_refresh = 0;
  ++s.work.full_refreshes;
  s.work.refresh_entries_touched += problem.a.nnz() + s.x.size();
}

void refresh(GradientState& s, const CompositeProblem& problem) {
  s.u = multiply(problem.a, s.x);
  double f = 0.0;
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    s.outer_value[k] = problem.outer.value(k, s.u[k]);
    s.outer_deriv[k] = problem.outer.derivative(k, s.u[k]);
    check_finite(s.outer_value[k], "outer value");
    check_finite(s.outer_deriv[k], "outer derivative");
    f += s.outer_value[k];
  }
  Vector g = multiply_transpose(problem.a, s.outer_deriv);
  for (std::size_t i = 0; i < g.size(); ++i) {
    f += problem.separable.value(i, s.x[i]);
    g[i] += problem.separable.derivative(i, s.x[i]);
  }
  record_deviation(s, g);
  s.g = std::move(g);
  s.f = f;
  rebuild_index(s);
  s.steps_since_refresh = 0;
  ++s.work.full_refreshes;
  s.work.refresh_entries_touched += 2 * problem.a.nnz() + s.x.size();
}

void coord_step(GradientState& s, const QuadraticProblem& problem, std::size_t i, double delta) {
  if (i >= s.x.size()) throw std::out_of_range("coord_step index " + std::to_string(i));
  if (delta != 0.0) {
    // f(x + d e_i) = f(x) + d g_i + d^2 A_ii / 2
    s.f += delta * s.g[i] + 0.5 * delta * delta * s.diag[i];
    s.x[i] += delta;
    for (const auto& e : problem.a.col(i)) {
      const double old = s.g[e.index];
      s.u[e.index] += delta * e.value;
      s.g[e.index] += delta * e.value;
      ++s.work.grad_entries_touched;
      update_key(s, e.index, old);
    }
  }
  if (++s.steps_since_refresh >= s.refresh_period) refresh(s, problem);
}

void coord_step(GradientState& s, const CompositeProblem& problem, std::size_t i, double delta) {
  if (i >= s.x.size()) throw std::out_of_range("coord_step index " + std::to_string(i));
  if (delta != 0.0) {
    auto touch = [&s](std::size_t j) {
      if (!s.marked[j]) {
        s.marked[j] = 1;
        s.touched.push_back(j);
      }
    };
    std::vector<double> old_g;
    const double x_old = s.x[i];
    s.x[i] += delta;
    for (const auto& ce : problem.a.col(i)) {
      const std::size_t k = ce.index;
      s.u[k] += delta * ce.value;
      const double value = problem.outer.value(k, s.u[k]);
      const double deriv = problem.outer.derivative(k, s.u[k]);
      check_finite(value, "outer value");
      check_finite(deriv, "outer derivative");
      s.f += value - s.outer_value[k];
      s.outer_value[k] = value;
      const double dd = deriv - s.outer_deriv[k];
      s.outer_deriv[k] = deriv;
      if (dd == 0.0) continue;
      for (const auto& re : problem.a.row(k)) {
        if (!s.marked[re.index]) old_g.push_back(s.g[re.index]);
        touch(re.index);
        s.g[re.index] += re.value * dd;
        ++s.work.grad_entries_touched;
      }
    }
    const double sv_old = problem.separable.value(i, x_old);
    const double sv_new = problem.separable.value(i, s.x[i]);
    const double sd = problem.separable.derivative(i, s.x[i]) -
                      problem.separable.derivative(i, x_old);
    check_finite(sv_new, "separable value");
    check_finite(sd, "separable derivative");
    s.f += sv_new - sv_old;
    if (sd != 0.0) {
      if (!s.marked[i]) {
        old_g.push_back(s.g[i]);
        touch(i);
        ++s.work.grad_entries_touched;
      }
      s.g[i] += sd;
    }
    for (std::size_t t = 0; t < s.touched.size(); ++t) {
      const std::size_t j = s.touched[t];
      update_key(s, j, old_g[t]);
      s.marked[j] = 0;
    }
    s.touched.clear();
  }
  if (++s.steps_since_refresh >= s.refresh_period) refresh(s, problem);
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

template <class Problem>
SolveReport run_greedy(const Problem& problem, Vector x0, const GreedyOptions& opt,
                       double step_constant, const char* method) {
  const StopRule& stop = opt.stop;
  if (stop.fgap_tol && !problem.known_fstar) {
    throw std::invalid_argument("fgap_tol requires a known optimal value");
  }
  if (!(step_constant > 0.0) || !std::isfinite(step_constant)) {
    throw std::invalid_argument(std::string(method) + ": step constant must be positive");
  }

  detail::Stopwatch clock;
  GradientState s = grad_init(problem, std::move(x0), IndexKind::heap, opt.refresh_period);

  SolveReport report;
  report.method = method;
  if (stop.fgap_tol && opt.r1) {
    report.a_priori_iterations = 2.0 * step_constant * *opt.r1 * *opt.r1 / *stop.fgap_tol;
  }

  auto gap_of = [&](double f) {
    return problem.known_fstar ? f - *problem.known_fstar : norm_inf(s.g);
  };
  auto row = [&](std::uint64_t k) {
    return detail::make_row(k, s.f, norm2(s.g), gap_of(s.f), s.work, clock);
  };
  report.trace.push_back(row(0));

  std::uint64_t k = 0;
  SolveStatus status = SolveStatus::budget_exhausted;
  while (true) {
    const std::size_t i = s.heap->top();
    const double gmax = s.heap->key(i);
    if (gmax == 0.0 || (stop.grad_inf_tol && gmax <= *stop.grad_inf_tol) ||
        (stop.fgap_tol && s.f - *problem.known_fstar <= *stop.fgap_tol)) {
      status = SolveStatus::converged;
      break;
    }
    if (k >= stop.max_iters) break;
    if (stop.wall_clock_limit && (k & 255) == 0 &&
        clock.elapsed_s() >= stop.wall_clock_limit->count()) {
      break;
    }

    const double partial = s.g[i];
    const double delta = -partial / step_constant;
    const double f_before = s.f;
    coord_step(s, problem, i, delta);
    ++k;
    if (opt.observer) opt.observer(s, StepInfo{k, i, partial, delta, f_before});
    if (detail::trace_due(k, opt.trace_every)) report.trace.push_back(row(k));
  }

  // Exact final figures, independent of incremental drift.
  const Vector g = problem.gradient(s.x);
  report.final_f = problem.objective(s.x);
  report.final_residual2 = norm2(g);
  report.final_gap =
      problem.known_fstar ? report.final_f - *problem.known_fstar : norm_inf(g);
  report.status = status;
  report.iterations = k;
  report.work = s.work;
  report.wall_ms = clock.elapsed_ms();
  detail::close_trace(report, detail::make_row(k, report.final_f, report.final_residual2,
                                               report.final_gap, s.work, clock));
  report.x = std::move(s.x);
  return report;
}

}  // namespace

SolveReport solve_greedy(const QuadraticProblem& problem, Vector x0,
                         const GreedyOptions& options) {
  problem.validate();
  const double l = problem.a.max_abs_entry();
  if (l == 0.0) throw std::invalid_argument("solve_greedy: zero matrix (L = 0)");
  return run_greedy(problem, std::move(x0), options, l, "greedy");
}

SolveReport solve_greedy_composite(const CompositeProblem& problem, Vector x0,
                                   const GreedyOptions& options) {
  return run_greedy(problem, std::move(x0), options, problem.step_constant(),
                    "greedy_composite");
}

double residual_bound(double fgap, double lambda_max) {
  if (fgap < 0.0 || lambda_max < 0.0) {
    throw std::invalid_argument("residual_bound: negative input");
  }
  return std::sqrt(2.0 * lambda_max * fgap);
}

}  // namespace sparseopt
