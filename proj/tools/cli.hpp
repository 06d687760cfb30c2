#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sparseopt/matrix_market.hpp"
#include "sparseopt/problems.hpp"
#include "sparseopt/report.hpp"

namespace sparseopt::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,          // output could not be written
  exit_budget = 2,           // eps not met within the budget
  exit_invalid = 3,          // bad flags, unreadable or incompatible input
  exit_breakdown = 4,        // numerical breakdown
};

/// Every method the CLI knows.
const std::vector<std::string>& method_names();

struct RunConfig {
  std::string method = "greedy";
  std::string matrix;
  std::string rhs;
  std::string meta;  // optional generator metadata (f*, mu)
  double eps = 1e-6;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> max_iters;
  std::string out;
  std::size_t trace_every = 100;
  std::string schedule = "shifted";
  double r0 = 1.0;
  double chi = 1.4142135623730951;
  std::optional<double> mu;
  // kk only
  std::size_t trials = 200;
  double radius = 1e8;
};

/// An instance read from disk. Non-square or unsymmetric matrices, or
/// metadata saying planted_ls, make it a least-squares problem.
struct LoadedProblem {
  SparseMatrix a;
  Vector b;
  std::optional<ProblemMeta> meta;
  std::optional<double> fstar;
  std::optional<double> mu;
  bool least_squares = false;
};

LoadedProblem load_problem(const RunConfig& cfg);

/// Runs one method. Throws std::invalid_argument when the method does not fit
/// the problem.
SolveReport run_method(const std::string& method, const LoadedProblem& problem,
                       const RunConfig& cfg);

int exit_code(SolveStatus status);

/// Header k,f,residual2,gap,grad_entries_touched,heap_ops,wall_ms.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);
std::string summary_line(const SolveReport& report);

int cmd_generate(const GeneratorSpec& spec, const std::string& prefix, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_compare(const RunConfig& cfg, const std::vector<std::string>& methods, std::ostream& out,
                std::ostream& log);

struct BenchConfig {
  GeneratorSpec spec;
  std::size_t instances = 3;  // seeds spec.seed .. spec.seed + instances - 1
  std::vector<std::string> methods{"greedy", "cg"};
  RunConfig run;
};

/// Instance x method grid, cells run on a worker pool capped by the
/// SOLVER_THREADS environment variable.
int cmd_bench(const BenchConfig& cfg, std::ostream& out, std::ostream& log);

/// Full command line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sparseopt::cli
