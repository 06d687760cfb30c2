#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sparseopt/baselines.hpp"
#include "sparseopt/frank_wolfe.hpp"
#include "sparseopt/greedy.hpp"
#include "sparseopt/rand_strong.hpp"

namespace sparseopt::cli {

namespace {

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw OutputError("cannot write " + path);
  return f;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

FwSchedule parse_schedule(const std::string& name) {
  if (name == "shifted") return FwSchedule::shifted;
  if (name == "classic") return FwSchedule::classic;
  throw std::invalid_argument("unknown schedule: " + name);
}

void require(bool ok, const std::string& method, const char* what) {
  if (!ok) throw std::invalid_argument(fmt::format("method {} needs {}", method, what));
}

FwConfig fw_config(const RunConfig& cfg) {
  FwConfig fw;
  fw.schedule = parse_schedule(cfg.schedule);
  fw.r0 = cfg.r0;
  fw.chi = cfg.chi;
  fw.eps = cfg.eps;
  fw.trace_every = cfg.trace_every;
  if (cfg.max_iters) fw.max_iters_per_r = *cfg.max_iters;
  return fw;
}

QuadraticProblem quadratic_of(const LoadedProblem& p) { return {p.a, p.b, p.fstar, p.mu}; }
LeastSquaresProblem least_squares_of(const LoadedProblem& p) { return {p.a, p.b, p.fstar}; }

LoadedProblem from_generated(const GeneratedProblem& g, const RunConfig& cfg) {
  LoadedProblem p;
  p.a = g.a;
  p.b = g.b;
  p.meta = meta_of(g);
  p.fstar = g.fstar;
  p.mu = cfg.mu ? cfg.mu : g.mu;
  p.least_squares = g.kind == ProblemKind::planted_ls;
  return p;
}

const char* kStatsHeader =
    "method,status,iterations,restarts,grad_entries_touched,heap_ops,tree_ops,"
    "refresh_entries_touched,a_priori_iterations,final_f,final_residual2,final_gap,met_eps,wall_ms";

std::string stats_row(const SolveReport& r) {
  const std::string a_priori = r.a_priori_iterations ? num(*r.a_priori_iterations) : "";
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3f}", r.method, to_string(r.status),
                     r.iterations, r.restarts, r.work.grad_entries_touched, r.work.heap_ops,
                     r.work.tree_ops, r.work.refresh_entries_touched, a_priori, num(r.final_f),
                     num(r.final_residual2), num(r.final_gap),
                     r.status == SolveStatus::converged ? 1 : 0, r.wall_ms);
}

int run_kk(const LoadedProblem& problem, const RunConfig& cfg, std::ostream& out,
           std::ostream& log) {
  if (problem.least_squares) throw std::invalid_argument("method kk needs a square instance");
  for (std::size_t i = 0; i < problem.a.n_rows(); ++i) {
    if (problem.a.row(i).size() > 1) throw std::invalid_argument("method kk needs a diagonal matrix");
  }
  KkExperimentSpec spec;
  spec.eigenvalues = kk_spectrum(problem.a);
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end());
  spec.eps = cfg.eps;
  spec.ball_radius = cfg.radius;
  spec.trials = cfg.trials;
  spec.seed = cfg.seed;
  if (cfg.max_iters) spec.max_iters = *cfg.max_iters;
  const KkReport report = kk_experiment(spec);

  std::ostringstream csv;
  csv << "trial,hitting_time,error,lower,upper,in_bracket\n";
  std::size_t converged = 0;
  for (std::size_t t = 0; t < report.trials.size(); ++t) {
    const KkTrial& tr = report.trials[t];
    converged += tr.converged ? 1 : 0;
    csv << fmt::format("{},{},{},{},{},{}\n", t, tr.hitting_time, num(tr.error), num(tr.lower),
                       num(tr.upper), tr.in_bracket() ? 1 : 0);
  }
  std::ostream& summary = cfg.out.empty() ? log : out;
  if (cfg.out.empty()) {
    out << csv.str();
  } else {
    auto f = open_output(cfg.out);
    f << csv.str();
    if (!f) throw OutputError("write failed: " + cfg.out);
  }
  summary << fmt::format("method=kk trials={} converged={} fraction_in_bracket={:.4f} upper_violations={}\n",
                         report.trials.size(), converged, report.fraction_in_bracket,
                         report.upper_violations);
  return converged == report.trials.size() ? exit_ok : exit_budget;
}

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"greedy", "greedy_composite", "fw", "fw_restarts",
                                              "fw_ls",  "rsc",              "cg", "simple_iter",
                                              "kk"};
  return names;
}

LoadedProblem load_problem(const RunConfig& cfg) {
  if (cfg.matrix.empty()) throw std::invalid_argument("--matrix is required");
  if (cfg.rhs.empty()) throw std::invalid_argument("--rhs is required");
  LoadedProblem p;
  p.a = mm_read(cfg.matrix);
  p.b = read_vector(cfg.rhs);
  if (p.b.size() != p.a.n_rows()) {
    throw std::invalid_argument(fmt::format("rhs has {} entries, matrix has {} rows", p.b.size(),
                                            p.a.n_rows()));
  }
  if (!cfg.meta.empty()) {
    p.meta = read_meta(cfg.meta);
    if (p.meta->n_rows != p.a.n_rows() || p.meta->n_cols != p.a.n_cols()) {
      throw std::invalid_argument("metadata shape does not match the matrix");
    }
    p.fstar = p.meta->fstar;
    p.mu = p.meta->mu;
  }
  if (cfg.mu) p.mu = cfg.mu;
  p.least_squares = !p.a.symmetric() || (p.meta && p.meta->kind == ProblemKind::planted_ls);
  return p;
}

namespace {

SolveReport dispatch(const std::string& method, const LoadedProblem& p, const RunConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const auto max_iters = [&](std::uint64_t fallback) { return cfg.max_iters.value_or(fallback); };

  if (method == "greedy" || method == "greedy_composite") {
    GreedyOptions opt;
    opt.stop.max_iters = max_iters(10'000'000);
    if (p.fstar) {
      opt.stop.fgap_tol = cfg.eps;
    } else {
      opt.stop.grad_inf_tol = cfg.eps;
    }
    opt.trace_every = cfg.trace_every;
    if (method == "greedy") {
      require(!p.least_squares, method, "a symmetric quadratic instance");
      return solve_greedy(quadratic_of(p), {}, opt);
    }
    require(p.least_squares, method, "a least-squares instance");
    CompositeProblem cp{p.a, ScalarFamily::squared_residual(p.b), ScalarFamily::zero(),
                        std::nullopt, p.fstar};
    return solve_greedy_composite(cp, {}, opt);
  }
  if (method == "fw") {
    const FwConfig fw = fw_config(cfg);
    if (p.least_squares) return fw_solve_fixed_R(least_squares_of(p), cfg.r0, fw).report;
    return fw_solve_fixed_R(quadratic_of(p), cfg.r0, fw).report;
  }
  if (method == "fw_restarts") {
    const FwConfig fw = fw_config(cfg);
    if (p.least_squares) return fw_least_squares(least_squares_of(p), fw).report;
    return fw_solve_restarts(quadratic_of(p), fw).report;
  }
  if (method == "fw_ls") {
    require(p.least_squares, method, "a least-squares instance");
    return fw_least_squares(least_squares_of(p), fw_config(cfg)).report;
  }
  if (method == "rsc") {
    require(!p.least_squares, method, "a symmetric quadratic instance");
    require(p.mu.has_value(), method, "mu (--mu or metadata)");
    RscOptions opt;
    opt.eps = cfg.eps;
    opt.seed = cfg.seed;
    opt.budget = max_iters(100'000'000);
    return rsc_solve(quadratic_of(p), opt).report;
  }
  if (method == "cg") {
    require(!p.least_squares, method, "a symmetric quadratic instance");
    CgOptions opt;
    opt.tol = cfg.eps;
    opt.max_iters = max_iters(0);
    opt.trace_every = cfg.trace_every;
    return cg_solve(p.a, p.b, opt);
  }
  if (method == "simple_iter") {
    require(!p.least_squares, method, "a symmetric quadratic instance");
    return simple_iteration_solve(quadratic_of(p), cfg.eps, max_iters(10'000'000),
                                  cfg.trace_every);
  }
  throw std::invalid_argument("unknown method: " + method);
}

}  // namespace

SolveReport run_method(const std::string& method, const LoadedProblem& p, const RunConfig& cfg) {
  SolveReport report = dispatch(method, p, cfg);
  report.method = method;
  return report;
}

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return exit_ok;
    case SolveStatus::budget_exhausted: return exit_budget;
    case SolveStatus::breakdown: return exit_breakdown;
  }
  return exit_failure;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "k,f,residual2,gap,grad_entries_touched,heap_ops,wall_ms\n";
  for (const TraceRow& r : trace) {
    out << fmt::format("{},{},{},{},{},{},{:.3f}\n", r.k, num(r.f), num(r.residual2), num(r.gap),
                       r.grad_entries_touched, r.heap_ops, r.wall_ms);
  }
}

std::string summary_line(const SolveReport& r) {
  std::string line = fmt::format(
      "method={} status={} iterations={} restarts={} f={:.12g} residual2={:.6g} gap={:.6g} "
      "grad_entries_touched={} wall_ms={:.1f}",
      r.method, to_string(r.status), r.iterations, r.restarts, r.final_f, r.final_residual2,
      r.final_gap, r.work.grad_entries_touched, r.wall_ms);
  for (const auto& note : r.notes) line += " note=" + note;
  return line;
}

int cmd_generate(const GeneratorSpec& spec, const std::string& prefix, std::ostream& log) {
  if (prefix.empty()) throw std::invalid_argument("--out prefix is required");
  const GeneratedProblem g = generate(spec);
  try {
    mm_write(prefix + ".mtx", g.a);
    write_vector(prefix + ".b.txt", g.b);
    write_meta(prefix + ".meta.json", meta_of(g));
  } catch (const std::runtime_error& e) {
    throw OutputError(e.what());
  }
  log << fmt::format("wrote {0}.mtx {0}.b.txt {0}.meta.json (n={1} nnz={2} x*_l1={3:.6g})\n",
                     prefix, g.a.n_cols(), g.a.nnz(), g.x_star_l1());
  return exit_ok;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const LoadedProblem problem = load_problem(cfg);
  if (cfg.method == "kk") return run_kk(problem, cfg, out, log);
  const SolveReport report = run_method(cfg.method, problem, cfg);
  if (cfg.out.empty()) {
    write_trace_csv(out, report.trace);
    log << summary_line(report) << '\n';
  } else {
    auto f = open_output(cfg.out);
    write_trace_csv(f, report.trace);
    if (!f) throw OutputError("write failed: " + cfg.out);
    out << summary_line(report) << '\n';
  }
  return exit_code(report.status);
}

int cmd_compare(const RunConfig& cfg, const std::vector<std::string>& methods, std::ostream& out,
                std::ostream& log) {
  if (methods.size() < 2) throw std::invalid_argument("compare needs at least two methods");
  const LoadedProblem problem = load_problem(cfg);
  std::ostringstream csv;
  csv << kStatsHeader << '\n';
  bool all_met = true;
  for (const auto& method : methods) {
    const SolveReport report = run_method(method, problem, cfg);
    csv << stats_row(report) << '\n';
    if (report.status != SolveStatus::converged) {
      all_met = false;
      log << fmt::format("{} did not reach eps={:g} ({})\n", method, cfg.eps,
                         to_string(report.status));
    }
  }
  if (cfg.out.empty()) {
    out << csv.str();
  } else {
    auto f = open_output(cfg.out);
    f << csv.str();
    if (!f) throw OutputError("write failed: " + cfg.out);
  }
  return all_met ? exit_ok : exit_budget;
}

int cmd_bench(const BenchConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.instances == 0) throw std::invalid_argument("bench needs at least one instance");
  if (cfg.methods.empty()) throw std::invalid_argument("bench needs at least one method");
  for (const auto& m : cfg.methods) {
    if (m == "kk" || std::find(method_names().begin(), method_names().end(), m) ==
                         method_names().end()) {
      throw std::invalid_argument("bench cannot run method " + m);
    }
  }
  std::vector<LoadedProblem> problems;
  for (std::size_t t = 0; t < cfg.instances; ++t) {
    GeneratorSpec spec = cfg.spec;
    spec.seed = cfg.spec.seed + t;
    problems.push_back(from_generated(generate(spec), cfg.run));
  }

  const std::size_t cells = problems.size() * cfg.methods.size();
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SOLVER_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) workers = std::min(workers, static_cast<std::size_t>(cap));
  }
  workers = std::min(workers, cells);

  std::vector<std::string> rows(cells);
  std::vector<std::string> errors(cells);
  std::vector<char> met(cells, 0);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t c = next++; c < cells; c = next++) {
      const std::size_t inst = c / cfg.methods.size();
      const std::string& method = cfg.methods[c % cfg.methods.size()];
      try {
        const SolveReport r = run_method(method, problems[inst], cfg.run);
        rows[c] = fmt::format("{},{}", cfg.spec.seed + inst, stats_row(r));
        met[c] = r.status == SolveStatus::converged;
      } catch (const std::exception& e) {
        errors[c] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t c = 0; c < cells; ++c) {
    if (!errors[c].empty()) throw std::invalid_argument(errors[c]);
  }
  std::ostringstream csv;
  csv << "instance_seed," << kStatsHeader << '\n';
  for (const auto& row : rows) csv << row << '\n';
  if (cfg.run.out.empty()) {
    out << csv.str();
  } else {
    auto f = open_output(cfg.run.out);
    f << csv.str();
    if (!f) throw OutputError("write failed: " + cfg.run.out);
  }
  const auto missed = static_cast<std::size_t>(std::count(met.begin(), met.end(), 0));
  log << fmt::format("bench: {} cells on {} workers, {} missed eps\n", cells, workers, missed);
  return missed == 0 ? exit_ok : exit_budget;
}

namespace {

void add_run_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--matrix", cfg.matrix, "Matrix Market file");
  app->add_option("--rhs", cfg.rhs, "right-hand side vector file");
  app->add_option("--meta", cfg.meta, "generator metadata (JSON)");
  app->add_option("--eps", cfg.eps, "target accuracy")->check(CLI::PositiveNumber);
  app->add_option("--seed", cfg.seed, "random seed");
  app->add_option("--max-iters", cfg.max_iters, "iteration budget");
  app->add_option("--out", cfg.out, "output path (stdout when omitted)");
  app->add_option("--trace-every", cfg.trace_every, "trace sampling period");
  app->add_option("--schedule", cfg.schedule, "Frank-Wolfe step schedule")
      ->check(CLI::IsMember({"classic", "shifted"}));
  app->add_option("--r0", cfg.r0, "initial radius")->check(CLI::PositiveNumber);
  app->add_option("--chi", cfg.chi, "radius growth factor");
  app->add_option("--mu", cfg.mu, "strong convexity modulus");
  app->add_option("--trials", cfg.trials, "kk: number of starting points");
  app->add_option("--radius", cfg.radius, "kk: starting-ball radius");
}

void add_generator_options(CLI::App* app, GeneratorSpec& spec, std::string& kind,
                           std::size_t& m, std::optional<std::size_t>& s) {
  app->add_option("--kind", kind, "spd | ls | kk")->check(CLI::IsMember(
      {"spd", "ls", "kk", "spd_diag_dominant", "planted_ls", "kk_diagonal"}));
  app->add_option("--n", spec.n, "dimension")->required();
  app->add_option("--m", m, "rows (ls only)");
  app->add_option("--s", s, "max nonzeros per row and column (default ceil(n^0.4))");
  app->add_option("--density", spec.density_xstar, "fraction of nonzeros in x*");
  app->add_option("--lo", spec.value_range.first, "value range low");
  app->add_option("--hi", spec.value_range.second, "value range high");
  app->add_option("--delta", spec.delta, "diagonal dominance margin");
  app->add_option("--seed", spec.seed, "random seed");
}

std::size_t resolve_sparsity(const std::optional<std::size_t>& s, const GeneratorSpec& spec) {
  if (s) return *s;
  return spec.kind == ProblemKind::kk_diagonal ? 1 : default_sparsity(spec.n);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse quadratic and least-squares solvers"};
  app.name("sparseopt");
  app.require_subcommand(1);

  GeneratorSpec gen_spec;
  std::string gen_kind = "spd";
  std::size_t gen_m = 0;
  std::string gen_prefix;
  auto* gen = app.add_subcommand("generate", "write a planted instance");
  std::optional<std::size_t> gen_s;
  add_generator_options(gen, gen_spec, gen_kind, gen_m, gen_s);
  gen->add_option("--out", gen_prefix, "output prefix")->required();

  RunConfig solve_cfg;
  auto* solve = app.add_subcommand("solve", "run one method and write its trace");
  add_run_options(solve, solve_cfg);
  solve->add_option("--method", solve_cfg.method, "solver")->check(CLI::IsMember(method_names()));

  RunConfig cmp_cfg;
  std::vector<std::string> cmp_methods;
  auto* cmp = app.add_subcommand("compare", "run several methods on one instance");
  add_run_options(cmp, cmp_cfg);
  cmp->add_option("--methods", cmp_methods, "solvers")
      ->delimiter(',')
      ->required()
      ->check(CLI::IsMember(method_names()));

  BenchConfig bench_cfg;
  std::string bench_kind = "spd";
  std::size_t bench_m = 0;
  auto* bench = app.add_subcommand("bench", "instance x method grid on generated problems");
  std::optional<std::size_t> bench_s;
  add_generator_options(bench, bench_cfg.spec, bench_kind, bench_m, bench_s);
  bench->add_option("--instances", bench_cfg.instances, "number of seeds");
  bench->add_option("--methods", bench_cfg.methods, "solvers")->delimiter(',');
  bench->add_option("--eps", bench_cfg.run.eps, "target accuracy")->check(CLI::PositiveNumber);
  bench->add_option("--max-iters", bench_cfg.run.max_iters, "iteration budget");
  bench->add_option("--out", bench_cfg.run.out, "output path");
  bench->add_option("--trace-every", bench_cfg.run.trace_every, "trace sampling period");
  bench->add_option("--schedule", bench_cfg.run.schedule, "Frank-Wolfe step schedule")
      ->check(CLI::IsMember({"classic", "shifted"}));
  bench->add_option("--r0", bench_cfg.run.r0, "initial radius");
  bench->add_option("--chi", bench_cfg.run.chi, "radius growth factor");
  bench->add_option("--mu", bench_cfg.run.mu, "strong convexity modulus");
  bench->add_option("--method-seed", bench_cfg.run.seed, "seed for randomized methods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_invalid;
  }

  try {
    if (*gen) {
      gen_spec.kind = problem_kind_from_string(gen_kind);
      gen_spec.s = resolve_sparsity(gen_s, gen_spec);
      if (gen_m > 0) gen_spec.m = gen_m;
      return cmd_generate(gen_spec, gen_prefix, out);
    }
    if (*solve) return cmd_solve(solve_cfg, out, err);
    if (*cmp) return cmd_compare(cmp_cfg, cmp_methods, out, err);
    if (*bench) {
      bench_cfg.spec.kind = problem_kind_from_string(bench_kind);
      bench_cfg.spec.s = resolve_sparsity(bench_s, bench_cfg.spec);
      if (bench_m > 0) bench_cfg.spec.m = bench_m;
      return cmd_bench(bench_cfg, out, err);
    }
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid;
  }
  return exit_invalid;
}

}  // namespace sparseopt::cli
