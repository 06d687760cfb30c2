#include "sparseopt/frank_wolfe.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "detail.hpp"

namespace sparseopt {

Vector FwState::materialize() const {
  Vector x(z.size(), 0.0);
  for (std::size_t i : support) x[i] = beta * z[i];
  return x;
}

FwVertex fw_vertex(std::span<const double> partials, double R) {
  if (partials.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < partials.size(); ++i) {
    if (partials[i] < partials[best]) best = i;
  }
  if (partials[best] < 0.0) return {best, R};
  return {};
}

double fw_gap(const FwState& state, double f_now) { return f_now - state.best_lb; }

double LeastSquaresProblem::objective(std::span<const double> x) const {
  Vector r = multiply(a, x);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] -= b[k];
  return 0.5 * dot(r, r);
}

std::size_t fw_budget(double l1, double R, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("fw_budget: eps must be positive");
  const double n = std::ceil(8.0 * l1 * R * R / eps);
  if (n >= static_cast<double>(std::numeric_limits<std::size_t>::max() / 2)) {
    return std::numeric_limits<std::size_t>::max() / 2;
  }
  return static_cast<std::size_t>(n);
}

double fw_beta_closed_form(FwSchedule schedule, std::uint64_t k) {
  const double kd = static_cast<double>(k);
  if (schedule == FwSchedule::shifted) return 2.0 / (kd * (kd + 1.0));
  return k <= 2 ? 1.0 : 2.0 / ((kd - 1.0) * kd);
}

namespace {

void validate(const FwConfig& cfg) {
  if (!(cfg.chi > 1.0)) throw std::invalid_argument("FwConfig: chi must exceed 1");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("FwConfig: eps must be positive");
  if (!(cfg.r0 > 0.0)) throw std::invalid_argument("FwConfig: r0 must be positive");
}

// Q = A, column i read directly.
struct QuadraticGram {
  const SparseMatrix& a;
  const Vector& b;

  std::size_t n() const { return a.n_cols(); }
  double diag(std::size_t i) const { return a.at(i, i); }
  template <class Fn>
  void column(std::size_t i, Fn&& fn) const {
    for (const auto& e : a.col(i)) fn(e.index, e.value);
  }
  double residual(const FwState& s) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.p.size(); ++i) {
      const double r = s.beta * s.p[i] - b[i];
      acc += r * r;
    }
    return std::sqrt(acc);
  }
  std::size_t column_bound() const { return a.s_col(); }
};

// Q = A^T A, column i assembled from the rows meeting column i of A.
struct LeastSquaresGram {
  const SparseMatrix& a;

  std::size_t n() const { return a.n_cols(); }
  double diag(std::size_t i) const { return a.col_sqnorm(i); }
  template <class Fn>
  void column(std::size_t i, Fn&& fn) const {
    for (const auto& ce : a.col(i)) {
      for (const auto& re : a.row(ce.index)) fn(re.index, ce.value * re.value);
    }
  }
  double residual(const FwState& s) const { return std::sqrt(std::max(0.0, 2.0 * s.f)); }
  std::size_t column_bound() const { return a.s_col() * a.s_row(); }
};

enum class Acceptance {
  gap_at_radius,       // certificate over S(R)
  gap_at_next_radius,  // certificate over S(chi R)
};

struct RunContext {
  const detail::Stopwatch& clock;
  std::uint64_t k_offset = 0;
  WorkCounters work_offset;
};

template <class Gram>
class FwEngine {
 public:
  FwEngine(const Gram& gram, const Vector& c, double constant, std::optional<double> fstar,
           const FwConfig& cfg)
      : gram_(gram), c_(c), constant_(constant), fstar_(fstar), cfg_(cfg) {
    in_c_.assign(gram_.n(), 0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] != 0.0) {
        c_support_.push_back(i);
        in_c_[i] = 1;
      }
    }
    diag_.resize(gram_.n());
    for (std::size_t i = 0; i < gram_.n(); ++i) diag_[i] = gram_.diag(i);
    std::size_t threshold = cfg_.dense_b_threshold;
    if (threshold == 0) threshold = std::max<std::size_t>(1, gram_.column_bound() * gram_.column_bound());
    dense_scan_ = c_support_.size() > threshold;
    marked_.assign(gram_.n(), 0);
  }

  bool dense_scan() const { return dense_scan_; }

  FwResult run(double R, std::size_t budget, Acceptance acceptance, const RunContext& ctx,
               const FwObserver& observer) {
    FwState s;
    const std::size_t n = gram_.n();
    s.z.assign(n, 0.0);
    s.p.assign(n, 0.0);
    s.constant = constant_;
    s.R = R;
    s.best_f = std::numeric_limits<double>::infinity();
    s.best_lb = -std::numeric_limits<double>::infinity();
    s.best_lb_next = -std::numeric_limits<double>::infinity();
    if (!dense_scan_) {
      Vector keys(n);
      for (std::size_t i = 0; i < n; ++i) keys[i] = -c_[i];
      s.heap.emplace(keys, HeapOrder::min);
    }
    for (double d : diag_) {
      if (d < 0.0) s.nonconvex_detected = true;
    }

    FwResult result;
    SolveReport& report = result.report;
    if (dense_scan_) report.notes.push_back("dense_b_scan");

    std::uint64_t steps = 0;
    SolveStatus status = SolveStatus::budget_exhausted;
    double cert = 0.0;
    while (true) {
      // Current iterate x^k: vertex, objective, lower bounds.
      std::size_t i_star = 0;
      double key = 0.0;
      if (s.heap) {
        i_star = s.heap->top();
        key = s.heap->key(i_star);
      } else {
        key = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          const double ki = s.p[i] - c_[i] / s.beta;
          if (ki < key) {
            key = ki;
            i_star = i;
          }
        }
      }
      const double partial = s.beta * key;
      const double quad = s.beta * s.beta * s.q;  // <Qx, x>
      const double lin = s.beta * s.r;            // <c, x>
      s.f = 0.5 * quad - lin + constant_;
      const double grad_dot_x = quad - lin;
      const double toward_vertex = partial < 0.0 ? partial : 0.0;
      s.min_partial = partial;
      s.vertex = partial < 0.0 ? std::optional<std::size_t>(i_star) : std::nullopt;
      s.best_f = std::min(s.best_f, s.f);
      s.best_lb = std::max(s.best_lb, s.f - grad_dot_x + R * toward_vertex);
      s.best_lb_next = std::max(s.best_lb_next, s.f - grad_dot_x + cfg_.chi * R * toward_vertex);
      s.gap = s.best_f - s.best_lb;
      if (quad < -1e-9 * (1.0 + std::abs(s.f))) s.nonconvex_detected = true;

      if (fstar_) {
        cert = s.f - *fstar_;
      } else if (acceptance == Acceptance::gap_at_next_radius) {
        cert = s.f - s.best_lb_next;
      } else {
        cert = s.f - s.best_lb;
      }

      if (observer) observer(s);
      if (detail::trace_due(steps, cfg_.trace_every)) {
        report.trace.push_back(row(s, steps, cert, ctx));
      }

      if (cert <= cfg_.eps) {
        status = SolveStatus::converged;
        break;
      }
      if (s.nonconvex_detected) {
        status = SolveStatus::breakdown;
        report.notes.push_back("nonconvex_detected");
        break;
      }
      if (steps >= budget) break;

      step(s, i_star, partial < 0.0);
      ++steps;
    }

    report.method = "fw";
    report.status = status;
    report.iterations = steps;
    report.final_f = s.f;
    report.final_residual2 = gram_.residual(s);
    report.final_gap = cert;
    report.work = s.work;
    report.x = s.materialize();
    if (s.renormalizations > 0) {
      report.notes.push_back("renormalized_" + std::to_string(s.renormalizations));
    }
    detail::close_trace(report, row(s, steps, cert, ctx));
    result.state = std::move(s);
    return result;
  }

 private:
  TraceRow row(const FwState& s, std::uint64_t steps, double cert, const RunContext& ctx) const {
    WorkCounters w = ctx.work_offset;
    w += s.work;
    return detail::make_row(ctx.k_offset + steps, s.f, gram_.residual(s), cert, w, ctx.clock);
  }

  void step(FwState& s, std::size_t i_star, bool toward_vertex) {
    const double kd = static_cast<double>(s.k);
    double beta_next = s.beta;
    double t = 1.0;
    if (cfg_.schedule == FwSchedule::classic && s.k == 1) {
      // gamma_1 = 1 sends x^2 to y^1; z^1 = 0, so keep beta = 1 and add y^1.
    } else {
      const double gamma =
          cfg_.schedule == FwSchedule::classic ? 2.0 / (kd + 1.0) : 2.0 / (kd + 2.0);
      beta_next = s.beta * (1.0 - gamma);
      t = gamma / beta_next;
    }

    if (toward_vertex) {
      const double add = t * s.R;
      s.q += 2.0 * add * s.p[i_star] + add * add * diag_[i_star];
      s.r += add * c_[i_star];
      if (s.z[i_star] == 0.0) s.support.push_back(i_star);
      s.z[i_star] += add;
      gram_.column(i_star, [&](std::size_t j, double v) {
        s.p[j] += add * v;
        ++s.work.grad_entries_touched;
        if (!marked_[j]) {
          marked_[j] = 1;
          touched_.push_back(j);
        }
      });
    }
    s.beta = beta_next;
    ++s.k;

    if (s.heap) {
      for (std::size_t j : touched_) {
        if (!in_c_[j]) set_key(s, j);
      }
      for (std::size_t j : c_support_) {
        set_key(s, j);
        ++s.work.grad_entries_touched;
      }
    }
    for (std::size_t j : touched_) marked_[j] = 0;
    touched_.clear();

    if (toward_vertex && std::abs(s.z[i_star]) > cfg_.renorm_threshold) renormalize(s);
  }

  void set_key(FwState& s, std::size_t j) {
    const auto before = s.heap->touched();
    s.heap->update(j, s.p[j] - c_[j] / s.beta);
    s.work.heap_ops += s.heap->touched() - before;
    ++s.work.index_updates;
  }

  // z <- beta z, beta <- 1; keys scale by beta, so the heap is rebuilt.
  void renormalize(FwState& s) {
    const double b = s.beta;
    for (std::size_t i : s.support) s.z[i] *= b;
    for (double& pi : s.p) pi *= b;
    s.q *= b * b;
    s.r *= b;
    s.beta = 1.0;
    if (s.heap) {
      Vector keys(s.p.size());
      for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = s.p[i] - c_[i];
      s.heap->rebuild(keys);
    }
    ++s.renormalizations;
    ++s.work.full_refreshes;
    s.work.refresh_entries_touched += s.p.size() + s.support.size();
  }

  const Gram& gram_;
  const Vector& c_;
  double constant_;
  std::optional<double> fstar_;
  const FwConfig& cfg_;
  std::vector<std::size_t> c_support_;
  std::vector<char> in_c_;
  Vector diag_;
  bool dense_scan_ = false;
  std::vector<char> marked_;
  std::vector<std::size_t> touched_;
};

template <class Gram>
FwRestartReport drive_restarts(FwEngine<Gram>& engine, double l1, bool fstar_known,
                               const FwConfig& cfg, const char* method) {
  validate(cfg);
  detail::Stopwatch clock;
  FwRestartReport out;
  SolveReport& report = out.report;
  report.method = method;
  RunContext ctx{clock, 0, {}};
  double R = cfg.r0;
  const Acceptance acceptance =
      fstar_known ? Acceptance::gap_at_radius : Acceptance::gap_at_next_radius;
  for (std::size_t attempt = 0; attempt <= cfg.max_outer_restarts; ++attempt) {
    const std::size_t budget = std::min(fw_budget(l1, R, cfg.eps), cfg.max_iters_per_r);
    FwResult run = engine.run(R, budget, acceptance, ctx, {});
    out.radii.push_back(R);
    out.budget_total += budget;
    report.iterations += run.report.iterations;
    report.work += run.report.work;
    report.trace.insert(report.trace.end(), run.report.trace.begin(), run.report.trace.end());
    for (auto& note : run.report.notes) {
      if (std::find(report.notes.begin(), report.notes.end(), note) == report.notes.end()) {
        report.notes.push_back(note);
      }
    }
    report.final_f = run.report.final_f;
    report.final_residual2 = run.report.final_residual2;
    report.final_gap = run.report.final_gap;
    report.x = std::move(run.report.x);
    report.status = run.report.status;
    out.final_radius = R;
    ctx.k_offset = report.iterations;
    ctx.work_offset = report.work;
    if (run.report.status != SolveStatus::budget_exhausted) break;
    if (attempt == cfg.max_outer_restarts) {
      report.notes.push_back("restart_limit_reached");
      break;
    }
    R *= cfg.chi;
    ++report.restarts;
  }
  report.a_priori_iterations = static_cast<double>(out.budget_total);
  report.wall_ms = clock.elapsed_ms();
  return out;
}

}  // namespace

FwResult fw_solve_fixed_R(const QuadraticProblem& problem, double R, const FwConfig& cfg,
                          const FwObserver& observer) {
  problem.validate();
  validate(cfg);
  if (!(R > 0.0)) throw std::invalid_argument("fw_solve_fixed_R: R must be positive");
  detail::Stopwatch clock;
  QuadraticGram gram{problem.a, problem.b};
  FwEngine<QuadraticGram> engine(gram, problem.b, 0.0, problem.known_fstar, cfg);
  FwResult result =
      engine.run(R, cfg.max_iters_per_r, Acceptance::gap_at_radius, {clock, 0, {}}, observer);
  result.report.a_priori_iterations =
      static_cast<double>(fw_budget(problem.a.max_abs_entry(), R, cfg.eps));
  result.report.wall_ms = clock.elapsed_ms();
  return result;
}

FwResult fw_solve_fixed_R(const LeastSquaresProblem& problem, double R, const FwConfig& cfg,
                          const FwObserver& observer) {
  validate(cfg);
  if (!(R > 0.0)) throw std::invalid_argument("fw_solve_fixed_R: R must be positive");
  if (problem.b.size() != problem.a.n_rows()) {
    throw std::invalid_argument("least squares rhs length mismatch");
  }
  detail::Stopwatch clock;
  LeastSquaresGram gram{problem.a};
  const Vector c = multiply_transpose(problem.a, problem.b);
  FwEngine<LeastSquaresGram> engine(gram, c, 0.5 * dot(problem.b, problem.b),
                                    problem.known_fstar, cfg);
  FwResult result =
      engine.run(R, cfg.max_iters_per_r, Acceptance::gap_at_radius, {clock, 0, {}}, observer);
  result.report.method = "fw_ls";
  result.report.a_priori_iterations =
      static_cast<double>(fw_budget(problem.a.max_col_sqnorm(), R, cfg.eps));
  result.report.wall_ms = clock.elapsed_ms();
  return result;
}

FwRestartReport fw_solve_restarts(const QuadraticProblem& problem, const FwConfig& cfg) {
  problem.validate();
  QuadraticGram gram{problem.a, problem.b};
  FwEngine<QuadraticGram> engine(gram, problem.b, 0.0, problem.known_fstar, cfg);
  return drive_restarts(engine, problem.a.max_abs_entry(), problem.known_fstar.has_value(), cfg,
                        "fw_restarts");
}

FwRestartReport fw_least_squares(const LeastSquaresProblem& problem, const FwConfig& cfg) {
  if (problem.b.size() != problem.a.n_rows()) {
    throw std::invalid_argument("least squares rhs length mismatch");
  }
  LeastSquaresGram gram{problem.a};
  const Vector c = multiply_transpose(problem.a, problem.b);
  FwEngine<LeastSquaresGram> engine(gram, c, 0.5 * dot(problem.b, problem.b),
                                    problem.known_fstar, cfg);
  // L1 of A^T A is its largest diagonal entry, max_i ||A^(i)||^2.
  return drive_restarts(engine, problem.a.max_col_sqnorm(), problem.known_fstar.has_value(), cfg,
                        "fw_ls");
}

}  // namespace sparseopt
