// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "sparseopt/baselines.hpp"
#include "sparseopt/frank_wolfe.hpp"
#include "sparseopt/greedy.hpp"
#include "sparseopt/matrix_market.hpp"
#include "sparseopt/problems.hpp"
#include "sparseopt/rand_strong.hpp"

using namespace sparseopt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GeneratedProblem spd(std::size_t n, std::size_t s, std::uint64_t seed, double density = 0.05) {
  GeneratorSpec spec;
  spec.n = n;
  spec.s = s;
  spec.seed = seed;
  spec.density_xstar = density;
  return gen_sparse_spd(spec);
}

GeneratedProblem planted_ls(std::size_t n, std::size_t m, std::size_t s, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.kind = ProblemKind::planted_ls;
  spec.n = n;
  spec.m = m;
  spec.s = s;
  spec.seed = seed;
  spec.density_xstar = 0.1;
  return gen_planted_ls(spec);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// 1
Outcome greedy_decrease() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t violations = 0;
  std::uint64_t steps = 0;
  double worst = -INFINITY;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = spd(1000, 5, 1000 + seed);
    const QuadraticProblem p = g.quadratic();
    const double L = p.a.max_abs_entry();
    double f_prev = p.objective(Vector(p.dim(), 0.0));
    GreedyOptions opt;
    opt.stop.fgap_tol = 1e-10;
    opt.stop.max_iters = 100000;
    opt.observer = [&](const GradientState& s, const StepInfo& info) {
      const double f_next = p.objective(s.x);
      const double slack = f_next - (f_prev - info.partial * info.partial / (2.0 * L));
      worst = std::max(worst, slack / (1.0 + std::abs(f_prev)));
      if (slack > 1e-10 * (1.0 + std::abs(f_prev))) ++violations;
      f_prev = f_next;
      ++steps;
    };
    solve_greedy(p, {}, opt);
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 30.0,
          fmt::format("{} steps over 50 instances, {} violations, worst slack {:.3g}, {:.2f} s",
                      steps, violations, worst, secs)};
}

// 2
Outcome refresh_fidelity() {
  const auto g = spd(50000, 5, 77, 0.2);
  const QuadraticProblem p = g.quadratic();
  GreedyOptions opt;
  opt.stop.max_iters = 100000;
  opt.refresh_period = 1000;
  double deviation = 0.0;
  std::size_t refreshes = 0;
  opt.observer = [&](const GradientState& s, const StepInfo&) {
    deviation = s.max_refresh_deviation;
    refreshes = s.refresh_count;
  };
  const auto r = solve_greedy(p, {}, opt);
  return {r.iterations == 100000 && refreshes >= 100 && deviation <= 1e-9,
          fmt::format("{} iterations, {} refreshes, max relative deviation {:.3g}", r.iterations,
                      refreshes, deviation)};
}

// 3
Outcome work_ceilings() {
  std::size_t bad = 0;
  std::uint64_t checked = 0;
  std::string notes;

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = spd(2000, 5, 300 + seed);
    const QuadraticProblem p = g.quadratic();
    const std::uint64_t s = p.a.s_col();
    const std::uint64_t op_cap = (s + 1) * (ceil_log2(p.dim()) + 2);
    WorkCounters last;
    GreedyOptions opt;
    opt.stop.fgap_tol = 1e-10;
    opt.refresh_period = 1u << 30;
    opt.observer = [&](const GradientState& st, const StepInfo&) {
      if (st.work.grad_entries_touched - last.grad_entries_touched > s) ++bad;
      if (st.work.heap_ops - last.heap_ops > op_cap) ++bad;
      last = st.work;
      ++checked;
    };
    solve_greedy(p, {}, opt);
  }

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = planted_ls(500, 700, 4, 400 + seed);
    CompositeProblem cp{g.a, ScalarFamily::squared_residual(g.b), ScalarFamily::zero(),
                        std::nullopt, 0.0};
    const std::uint64_t s_m = g.a.s_col();  // rows meeting one column
    const std::uint64_t s_n = g.a.s_row();  // columns meeting one row
    const std::uint64_t cap = s_m * s_n;
    const std::uint64_t op_cap = (cap + 1) * (ceil_log2(g.a.n_cols()) + 2);
    WorkCounters last;
    GreedyOptions opt;
    opt.stop.fgap_tol = 1e-10;
    opt.stop.max_iters = 20000;
    opt.refresh_period = 1u << 30;
    opt.observer = [&](const GradientState& st, const StepInfo&) {
      if (st.work.grad_entries_touched - last.grad_entries_touched > cap) ++bad;
      if (st.work.heap_ops - last.heap_ops > op_cap) ++bad;
      last = st.work;
      ++checked;
    };
    solve_greedy_composite(cp, {}, opt);
  }

  {
    const auto g = spd(2000, 5, 500);
    const QuadraticProblem p = g.quadratic();
    const std::uint64_t s = p.a.s_col();
    const std::uint64_t op_cap = (s + 1) * (ceil_log2(p.dim()) + 2);
    auto st = rsc_init(p);
    st.grad.refresh_period = 1u << 30;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < 50000; ++k) {
      const WorkCounters before = st.grad.work;
      if (!rsc_step(st, p, unif(rng))) break;
      if (st.grad.work.grad_entries_touched - before.grad_entries_touched > s) ++bad;
      if (st.grad.work.tree_ops - before.tree_ops > op_cap) ++bad;
      ++checked;
    }
  }
  return {bad == 0, fmt::format("{} steps checked (greedy, composite, randomized), {} over the ceiling",
                                checked, bad)};
}

double max_rel_deviation(const std::vector<Vector>& got, const std::vector<Eigen::VectorXd>& ref) {
  if (got.size() != ref.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    const Eigen::VectorXd d = oracle::to_eigen(got[k]) - ref[k];
    worst = std::max(worst, ref[k].norm() == 0.0 ? d.norm() : d.norm() / ref[k].norm());
  }
  return worst;
}

FwConfig fixed_iters(FwSchedule schedule, std::size_t iters) {
  FwConfig cfg;
  cfg.schedule = schedule;
  cfg.eps = 1e-300;
  cfg.max_iters_per_r = iters;
  return cfg;
}

// 4
Outcome fw_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = spd(100, 5, 41, 0.1);
  const QuadraticProblem p = g.quadratic();
  const double R = 1.2 * g.x_star_l1();
  double worst = 0.0;
  for (FwSchedule sch : {FwSchedule::classic, FwSchedule::shifted}) {
    std::vector<Vector> xs;
    fw_solve_fixed_R(p, R, fixed_iters(sch, 1000),
                     [&](const FwState& s) { xs.push_back(s.materialize()); });
    const auto ref = oracle::naive_fw(oracle::dense(p.a), oracle::to_eigen(p.b), R, 1000, sch);
    worst = std::max(worst, max_rel_deviation(xs, ref));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0,
          fmt::format("max relative deviation {:.3g} over 1000 iterations x 2 schedules, {:.2f} s",
                      worst, secs)};
}

// 5
Outcome fw_gap_rate() {
  double worst_ratio = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = spd(300, 5, 600 + seed, 0.05);
    const QuadraticProblem p = g.quadratic();
    const double l1 = p.a.max_abs_entry();
    for (double scale : {1.0, 1.5}) {
      const double R = scale * g.x_star_l1();
      for (FwSchedule sch : {FwSchedule::classic, FwSchedule::shifted}) {
        fw_solve_fixed_R(p, R, fixed_iters(sch, 5000), [&](const FwState& s) {
          if (s.k < 10) return;
          const double kd = static_cast<double>(s.k);
          // R1^2 = (2R)^2 bounds the squared l1 diameter of S(R)
          const double bound = sch == FwSchedule::classic ? 2.0 * l1 * 4.0 * R * R / (kd + 1.0)
                                                          : 7.0 * l1 * 4.0 * R * R / (kd + 2.0);
          worst_ratio = std::max(worst_ratio, s.gap / bound);
          ++checked;
        });
      }
    }
  }
  return {worst_ratio <= 1.05,
          fmt::format("{} iterates, worst gap / bound = {:.4f}", checked, worst_ratio)};
}

// 6
Outcome fw_restart_overhead() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t unconverged = 0;
  std::vector<double> ratios_actual;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = spd(100, 4, 700 + seed, 0.05);
    const QuadraticProblem p = g.quadratic();
    FwConfig cfg;
    cfg.eps = 1e-3;
    const auto rr = fw_solve_restarts(p, cfg);
    if (rr.report.status != SolveStatus::converged) ++unconverged;
    const double l1 = p.a.max_abs_entry();
    const double oracle_budget = static_cast<double>(fw_budget(l1, g.x_star_l1(), cfg.eps));
    worst = std::max(worst, static_cast<double>(rr.budget_total) / oracle_budget);
    const auto single = fw_solve_fixed_R(p, g.x_star_l1(), cfg);
    ratios_actual.push_back(static_cast<double>(rr.report.iterations) /
                            static_cast<double>(std::max<std::uint64_t>(1, single.report.iterations)));
  }
  return {worst <= 4.4 && unconverged == 0,
          fmt::format("worst budget ratio {:.3f} over 20 instances, {} unconverged, median "
                      "actual-iteration ratio {:.2f}, {:.1f} s",
                      worst, unconverged, median(ratios_actual), seconds_since(t0))};
}

// 7
Outcome rsc_unbiased_and_average() {
  double worst_bias = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<Triple> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0 + i});
    const QuadraticProblem p{SparseMatrix::build(t, n, n, true), Vector(n), std::nullopt, 0.5};
    Vector x(n);
    for (auto& xi : x) xi = val(rng);
    auto s = rsc_init(p, x);
    for (std::uint64_t k : {1, 3, 10, 1000}) {
      s.k = k;
      const double total = s.grad.tree->total();
      double before = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::abs(s.grad.g[i]);
        const auto m = rsc_move(s, 0.5, (before + 0.5 * w) / total);
        before += w;
        const double expected = w / total * m.delta;
        const double target = -2.0 / (0.5 * (k + 1)) * s.grad.g[i];
        if (m.coordinate != i) worst_bias = INFINITY;
        worst_bias = std::max(worst_bias, std::abs(expected - target) /
                                              std::max(1e-300, std::abs(target)));
      }
    }
  }

  const auto g = spd(50, 4, 9, 0.2);
  const QuadraticProblem p = g.quadratic();
  auto s = rsc_init(p);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector w(p.dim(), 0.0);
  auto accumulate = [&] {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += static_cast<double>(s.k) * s.grad.x[i];
  };
  accumulate();
  for (int step = 0; step < 1000; ++step) {
    rsc_step(s, p, unif(rng));
    accumulate();
  }
  const double kd = static_cast<double>(s.k);
  const Vector y = rsc_average(s);
  double worst_avg = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double ref = 2.0 * w[i] / (kd * (kd + 1.0));
    worst_avg = std::max(worst_avg, std::abs(y[i] - ref) / std::max(1.0, std::abs(ref)));
  }
  return {worst_bias <= 1e-14 && worst_avg <= 1e-9,
          fmt::format("expected-step relative error {:.3g}, lazy average deviation {:.3g}",
                      worst_bias, worst_avg)};
}

// 8
Outcome rsc_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> epss{1e-2, 1e-4, 1e-6};
  std::vector<double> med_restarts;
  double med_gap_1e4 = 0.0;
  std::size_t unconverged = 0;
  for (double eps : epss) {
    std::vector<double> restarts, gaps;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = spd(500, 5, 800 + seed);
      RscOptions opt;
      opt.eps = eps;
      opt.seed = seed;
      const auto r = rsc_solve(g.quadratic(), opt);
      if (r.report.status != SolveStatus::converged) ++unconverged;
      restarts.push_back(static_cast<double>(r.report.restarts));
      gaps.push_back(r.report.final_f - g.fstar);
    }
    med_restarts.push_back(median(restarts));
    if (eps == 1e-4) med_gap_1e4 = median(gaps);
  }
  const double c = med_restarts[0] / std::log2(1.0 / epss[0]);
  bool growth_ok = true;
  for (std::size_t j = 0; j < epss.size(); ++j) {
    if (med_restarts[j] > c * std::log2(1.0 / epss[j]) + 1e-12) growth_ok = false;
  }
  const double secs = seconds_since(t0);
  return {med_gap_1e4 <= 1e-4 && growth_ok && unconverged == 0 && secs < 120.0,
          fmt::format("median f(y)-f* at eps=1e-4: {:.3g}; median restarts {}/{}/{} vs C={:.3f}; "
                      "{} unconverged; {:.1f} s",
                      med_gap_1e4, med_restarts[0], med_restarts[1], med_restarts[2], c,
                      unconverged, secs)};
}

// 9
Outcome residual_corollary() {
  std::size_t runs = 0, bad = 0;
  double worst = 0.0;
  const double tol = 1e-6;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = spd(500, 5, 900 + seed, 0.1);
    const QuadraticProblem p = g.quadratic();
    const double lmax = power_lambda_max(p.a, 100000, 1e-12, seed).lambda;
    for (double eps : {1e-2, 1e-5, 1e-9}) {
      GreedyOptions opt;
      opt.stop.fgap_tol = eps;
      const auto r = solve_greedy(p, {}, opt);
      const double gap = std::max(0.0, p.objective(r.x) - g.fstar);
      const double res = norm2(p.gradient(r.x));
      const double bound = residual_bound(gap, lmax);
      worst = std::max(worst, bound > 0 ? res / bound : (res > 0 ? INFINITY : 0.0));
      if (res > bound * (1.0 + tol) + 1e-14) ++bad;
      ++runs;
    }
  }
  return {bad == 0, fmt::format("{} greedy runs, {} violations, worst residual / bound {:.4f}",
                                runs, bad, worst)};
}

// 10
Outcome kk_bracket() {
  const auto t0 = std::chrono::steady_clock::now();
  GeneratorSpec spec;
  spec.kind = ProblemKind::kk_diagonal;
  spec.n = 100;
  spec.value_range = {0.5, 0.999};
  spec.seed = 10;
  const auto g = gen_kk_diagonal(spec);
  KkExperimentSpec kk;
  kk.eigenvalues = kk_spectrum(g.a);
  kk.eps = 1e-3;
  kk.ball_radius = 1e8;
  kk.trials = 200;
  kk.seed = 10;
  const auto r = kk_experiment(kk);
  std::size_t unconverged = 0;
  for (const auto& t : r.trials) unconverged += t.converged ? 0 : 1;
  const double secs = seconds_since(t0);
  return {r.upper_violations == 0 && r.fraction_in_bracket >= 0.95 && unconverged == 0 &&
              secs < 60.0,
          fmt::format("{} trials, {} upper violations, {:.1f}% within the bracket, {:.1f} s",
                      r.trials.size(), r.upper_violations, 100.0 * r.fraction_in_bracket, secs)};
}

// 11
Outcome cg_baseline() {
  double worst_res = 0.0, worst_err = 0.0;
  std::uint64_t worst_iters = 0;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = oracle::from_dense(oracle::random_spd(50, 0.1, 0.5, seed), true);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Vector b(50);
    for (auto& bi : b) bi = nd(rng);
    const auto r = cg_solve(a, b, {});
    const Vector ref = oracle::solve_spd(a, b);
    const double err = (oracle::to_eigen(r.x) - oracle::to_eigen(ref)).norm();
    Vector ax = multiply(a, r.x);
    for (std::size_t i = 0; i < ax.size(); ++i) ax[i] -= b[i];
    const double res = norm2(ax);
    ok = ok && r.status == SolveStatus::converged && r.iterations <= 50 && res <= 1e-8 &&
         err <= 1e-6;
    worst_res = std::max(worst_res, res);
    worst_err = std::max(worst_err, err);
    worst_iters = std::max(worst_iters, r.iterations);
  }
  return {ok, fmt::format("10 systems, max iterations {}, max residual {:.3g}, max error {:.3g}",
                          worst_iters, worst_res, worst_err)};
}

// 12
struct CliRun {
  int code = 0;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sparseopt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

std::string strip_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "sparseopt_acceptance";
  fs::create_directories(dir);
  const std::string base = (dir / "inst").string();
  const std::vector<std::string> gen{"generate", "--n", "400", "--s", "5", "--seed", "12",
                                     "--out", base};
  if (cli(gen).code != 0) return {false, "generate failed"};
  const std::string first = slurp(base + ".mtx") + slurp(base + ".b.txt");
  if (cli(gen).code != 0 || slurp(base + ".mtx") + slurp(base + ".b.txt") != first) {
    return {false, "generate is not reproducible"};
  }
  const std::vector<std::string> files{"--matrix", base + ".mtx", "--rhs", base + ".b.txt",
                                       "--meta", base + ".meta.json"};
  std::size_t mismatches = 0;
  for (const char* method : {"greedy", "rsc", "cg", "fw_restarts"}) {
    std::vector<std::string> args{"solve", "--method", method, "--eps", "1e-3", "--seed", "5",
                                  "--trace-every", "3"};
    args.insert(args.end(), files.begin(), files.end());
    const auto a = cli(args);
    const auto b = cli(args);
    if (a.code != 0 || strip_wall(a.out) != strip_wall(b.out)) ++mismatches;
  }
  {
    std::vector<std::string> args{"compare", "--methods", "greedy,cg,rsc", "--eps", "1e-4"};
    args.insert(args.end(), files.begin(), files.end());
    if (strip_wall(cli(args).out) != strip_wall(cli(args).out)) ++mismatches;
  }

  const std::string toy = (dir / "toy").string();
  mm_write(toy + ".mtx", SparseMatrix::build({{0, 0, 2.0}, {1, 1, 1.0}}, 2, 2, true));
  write_vector(toy + ".b.txt", Vector{2.0, 1.0});
  std::ofstream(toy + ".meta.json")
      << R"({"kind":"spd_diag_dominant","n_rows":2,"n_cols":2,"s":1,"mu":1.0,"fstar":-1.5,)"
      << R"("x_star_l1":2.0,"seed":0})";
  const auto golden_run = cli({"solve", "--method", "greedy", "--trace-every", "1", "--matrix",
                               toy + ".mtx", "--rhs", toy + ".b.txt", "--meta", toy + ".meta.json"});
  const bool golden_ok = golden_run.code == 0 &&
                         strip_wall(golden_run.out) ==
                             strip_wall(slurp(fs::path(GOLDEN_DIR) / "greedy_toy.csv"));
  return {mismatches == 0 && golden_ok,
          fmt::format("{} nondeterministic outputs, golden file {}", mismatches,
                      golden_ok ? "matches" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"greedy per-step decrease", greedy_decrease},
      {"incremental gradient fidelity", refresh_fidelity},
      {"work ceilings", work_ceilings},
      {"frank-wolfe z-trick equivalence", fw_equivalence},
      {"frank-wolfe gap rate", fw_gap_rate},
      {"radius restart overhead", fw_restart_overhead},
      {"randomized step unbiasedness and lazy average", rsc_unbiased_and_average},
      {"randomized method convergence", rsc_convergence},
      {"residual corollary", residual_corollary},
      {"simple iteration bracket", kk_bracket},
      {"conjugate gradient baseline", cg_baseline},
      {"cli determinism and golden file", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    fmt::print("{} {:>2} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
