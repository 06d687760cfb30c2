#pragma once

#include <chrono>
#include <cstdint>

#include "sparseopt/report.hpp"

namespace sparseopt::detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }
  double elapsed_s() const { return elapsed_ms() / 1000.0; }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline bool trace_due(std::uint64_t k, std::size_t every) { return every > 0 && k % every == 0; }

inline TraceRow make_row(std::uint64_t k, double f, double residual2, double gap,
                         const WorkCounters& work, const Stopwatch& clock) {
  return {k, f, residual2, gap, work.grad_entries_touched, work.heap_ops + work.tree_ops,
          clock.elapsed_ms()};
}

/// Appends the closing row unless the last recorded row is already at k.
inline void close_trace(SolveReport& report, const TraceRow& row) {
  if (report.trace.empty() || report.trace.back().k != row.k) {
    report.trace.push_back(row);
  } else {
    report.trace.back() = row;
  }
}

}  // namespace sparseopt::detail
