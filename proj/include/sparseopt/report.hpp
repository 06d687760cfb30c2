#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparseopt/sparse_matrix.hpp"

namespace sparseopt {

/// Arithmetic-work audit. Per-step counters only grow inside single-coordinate
/// updates; periodic full recomputations are tallied separately so per-step
/// ceilings can be asserted on the former.
struct WorkCounters {
  std::uint64_t grad_entries_touched = 0;  // cached gradient entries rewritten by steps
  std::uint64_t index_updates = 0;         // heap/tree key updates issued by steps
  std::uint64_t heap_ops = 0;              // heap slots visited
  std::uint64_t tree_ops = 0;              // sum-tree nodes visited
  std::uint64_t full_refreshes = 0;
  std::uint64_t refresh_entries_touched = 0;  // work inside refreshes and restart checks

  WorkCounters& operator+=(const WorkCounters& o);
};

struct TraceRow {
  std::uint64_t k = 0;
  double f = 0.0;
  double residual2 = 0.0;
  double gap = 0.0;
  std::uint64_t grad_entries_touched = 0;
  std::uint64_t heap_ops = 0;
  double wall_ms = 0.0;
};

enum class SolveStatus {
  converged,         // the method's stopping test was met
  budget_exhausted,  // iteration / wall-clock / restart budget ran out first
  breakdown,         // numerical breakdown (CG curvature, detected nonconvexity)
};

const char* to_string(SolveStatus s);

struct SolveReport {
  std::string method;
  SolveStatus status = SolveStatus::budget_exhausted;
  std::uint64_t iterations = 0;
  std::uint64_t restarts = 0;
  double wall_ms = 0.0;
  double final_f = 0.0;
  double final_residual2 = 0.0;
  /// Method-specific optimality measure: FW certificate gap, ||grad f(y)||_2
  /// for the randomized method, f - f* or ||g||_inf for greedy.
  double final_gap = 0.0;
  WorkCounters work;
  std::vector<TraceRow> trace;
  Vector x;
  /// A-priori iteration bound, when the caller supplied the constants for it.
  std::optional<double> a_priori_iterations;
  std::vector<std::string> notes;
};

}  // namespace sparseopt
