#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kyp/core_model.hpp"
#include "kyp/execution.hpp"
#include "kyp/riccati_calculus.hpp"

namespace kyp {

/// Which Hessian the Newton system uses.
///
/// `exact` is the true second derivative of v_t. `doubled_quadratic` doubles
/// the tr(X⁻¹∂_iX X⁻¹∂_jX) terms of every log-det barrier; it equals the exact
/// Hessian plus a positive semidefinite Gram matrix, so it still yields descent
/// directions, but it no longer matches finite differences of the gradient.
enum class HessianForm { exact, doubled_quadratic };

/// Relative evaluation noise assumed for v_t. A Newton step whose predicted
/// decrease ½·decrement² falls below kRoundoffNoise·(1 + |v_t|) ends the stage.
inline constexpr double kRoundoffNoise = 1e-10;

struct SolverConfig {
  std::optional<double> t0;  // default 1 / (1 + |objective(λ0)|)
  double t_max = 1e6;
  double t_factor = 10.0;
  double newton_tol = 1e-6;  // stage ends when the Newton decrement drops below this
  int max_newton_iters = 100;  // per t-stage
  long max_total_iters = 0;    // 0 = unlimited
  double ls_backtrack = 0.5;
  double ls_slope = 0.25;
  int ls_max_steps = 60;
  PairOptions pair;
  HessianForm hessian = HessianForm::exact;
  Exec exec = Exec::parallel;
  /// Called after every accepted step; returning true ends the solve early
  /// with status optimal.
  std::function<bool(const Vector&)> early_stop;

  void validate() const;
};

/// v_t(λ) = t(cᵀλ − tr ΣP_+) − log det N − log det P_+ − log det(−R) − log det Δ.
struct BarrierValue {
  double value = 0.0;
  double objective = 0.0;  // cᵀλ − tr ΣP_+
  RiccatiPair pair;
};

/// Throws OutOfDomain when λ ∉ 𝒟 or N, −R, P_+, Δ is not positive definite.
BarrierValue evaluate_barrier(const KypProblem& prob, const Vector& lambda, double t,
                              const PairOptions& opts = {});

double objective_value(const KypProblem& prob, const Vector& lambda, const Matrix& P_plus);

Vector gradient(const KypProblem& prob, const RiccatiPair& pair, const DerivativeBundle& bundle,
                double t);

Matrix hessian(const KypProblem& prob, const RiccatiPair& pair, const DerivativeBundle& bundle,
               double t, HessianForm form = HessianForm::exact, Exec exec = Exec::parallel);

struct IterateState {
  Vector lambda;
  double t = 0.0;
  RiccatiPair pair;
  DerivativeBundle bundle;
  double v = 0.0;
  Vector grad;
  Matrix hess;
  double newton_decrement = 0.0;
};

struct NewtonStep {
  Vector direction;
  double decrement = 0.0;
  bool gradient_fallback = false;
};

/// Solves H d = −∇v by Cholesky, retrying with a diagonal shift; falls back
/// to d = −∇v when H stays singular.
NewtonStep newton_step(const Vector& grad, const Matrix& hess);
NewtonStep newton_step(const IterateState& state);

struct LineSearchResult {
  double alpha = 0.0;
  BarrierValue at;    // barrier evaluation at λ + αd
  int probes = 0;
  int rejected_out_of_domain = 0;
  SolveCounters counters;
};

/// Backtracking from α = 1 until λ + αd lies in the barrier domain and the
/// Armijo condition v(λ + αd) ≤ v(λ) + ls_slope·α·∇vᵀd holds.
/// Throws LineSearchFailed after ls_max_steps.
LineSearchResult line_search(const KypProblem& prob, const Vector& lambda, const Vector& d,
                             double t, double v0, double slope, const SolverConfig& cfg);

enum class SolveStatus { optimal, infeasible, max_iters, domain_error };

const char* to_string(SolveStatus s);

struct StageRecord {
  double t = 0.0;
  int newton_iters = 0;
  double decrement = 0.0;
  double objective = 0.0;
  double seconds = 0.0;
  bool roundoff_stall = false;
};

struct SolveReport {
  SolveStatus status = SolveStatus::domain_error;
  Vector lambda_opt;
  Matrix P_plus_opt;
  double objective = 0.0;
  long newton_iters_total = 0;
  long riccati_solves = 0;
  long lyapunov_solves = 0;
  long gradient_fallbacks = 0;
  double t_final = 0.0;
  double last_decrement = 0.0;
  double seconds = 0.0;
  double newton_seconds = 0.0;  // wall time spent inside Newton iterations
  std::string message;
  std::vector<StageRecord> history;
};

/// Path-following barrier method. λ0 must be strictly feasible; an infeasible
/// start returns status domain_error rather than throwing.
SolveReport solve(const KypProblem& prob, const Vector& lambda0, const SolverConfig& cfg = {});

/// Barrier margins at a point: minimum eigenvalues of −R, N, P_+ and Δ.
struct FeasibilityMargins {
  double neg_R = 0.0;
  double N = 0.0;
  double P_plus = 0.0;
  double Delta = 0.0;
  bool in_domain = false;

  bool strictly_feasible() const {
    return in_domain && neg_R > 0.0 && N > 0.0 && P_plus > 0.0 && Delta > 0.0;
  }
};

FeasibilityMargins feasibility_margins(const KypProblem& prob, const Vector& lambda,
                                       const PairOptions& opts = {});

/// Phase-I problem over (λ_0, λ): Q − λ_0 I, R − λ_0 I, N + λ_0 I, objective
/// λ_0, with the box |λ_i| < `box` appended to N. Without the box the barrier
/// terms can keep decreasing along directions in λ that leave λ_0 unchanged.
KypProblem phase1_problem(const KypProblem& prob, double box);

inline constexpr double kPhase1Box = 1e3;
inline constexpr double kPhase1BoxGrowth = 1e3;
inline constexpr double kPhase1BoxMax = 1e12;
/// Phase I runs until the barrier gap order/t is below this, so a final
/// λ_0 ≥ 0 means no point has all margins above kPhase1Tol.
inline constexpr double kPhase1Tol = 1e-9;

struct Phase1Result {
  bool feasible = false;
  Vector lambda;        // strictly feasible point of the original problem
  double lambda0 = 0.0; // last phase-I shift; the infeasibility certificate when ≥ 0
  Vector start;         // initial (λ_0, λ) used for the phase-I solve
  double box = 0.0;     // search box of the last attempt
  SolveReport report;
};

/// Retries with the box enlarged by kPhase1BoxGrowth while the phase-I
/// optimum sits on the box boundary. The barrier weight is raised past
/// cfg.t_max when needed to reach the kPhase1Tol gap; the run stops at the
/// first iterate with λ_0 < 0 that is strictly feasible.
Phase1Result phase1(const KypProblem& prob, const SolverConfig& cfg = {});

}  // namespace kyp
