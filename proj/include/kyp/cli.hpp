#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kyp/barrier_ipm.hpp"
#include "kyp/core_model.hpp"

namespace kyp::cli {

enum ExitCode : int { kOk = 0, kInvalid = 1, kInfeasible = 2, kNumerical = 3 };

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Phase I (unless `initial` is strictly feasible) followed by the barrier
/// solve.
struct Pipeline {
  int exit_code = kNumerical;
  bool ran_phase1 = false;
  Phase1Result phase1;
  SolveReport report;
};

Pipeline solve_pipeline(const KypProblem& prob, const std::optional<Vector>& initial,
                        const SolverConfig& cfg);

struct BenchRow {
  int n = 0;
  int p = 0;
  long newton_iters = 0;
  long riccati_solves = 0;
  long lyapunov_solves = 0;
  double secs_per_iter = 0.0;
};

struct BenchOptions {
  std::vector<int> sizes;
  int repeats = 1;
  double gamma = 0.25;
  long max_iters = 8;  // Newton iterations timed per run
};

/// One row per size (the median of `repeats` runs by secs_per_iter). Sizes are
/// state dimensions of mass-spring chains and must be even.
std::vector<BenchRow> run_bench(const BenchOptions& opts, std::ostream* log = nullptr);

/// Least-squares slope of log(secs_per_iter) against log(n); empty with fewer
/// than two distinct sizes.
std::optional<double> fit_loglog_slope(const std::vector<BenchRow>& rows);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace kyp::cli
