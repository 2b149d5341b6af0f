#pragma once

#include <vector>

#include "kyp/core_model.hpp"
#include "kyp/execution.hpp"
#include "kyp/riccati_calculus.hpp"

namespace kyp {

/// −λ_max of [AᵀP + PA + Q, PB + S; (PB + S)ᵀ, R], assembled by dense block
/// products. Positive exactly when (λ, P) is strictly feasible for the LMI.
double check_kyp_lmi(const KypProblem& prob, const Vector& lambda, const Matrix& P);

/// n log-spaced frequencies in [lo, hi].
std::vector<double> log_frequency_grid(int points = 200, double lo = 1e-3, double hi = 1e3);

struct FrequencyReport {
  double margin = 0.0;       // −max over evaluated points of λ_max(Φ(ω))
  double worst_omega = 0.0;  // +inf for the point at infinity
  int evaluated = 0;
  int skipped = 0;           // grid points within the axis band of eig(A)
};

/// Samples Φ(ω) = [(iωI − A)⁻¹B; I]* [Q S; Sᵀ R] [(iωI − A)⁻¹B; I] on the
/// grid (and R at ω = ∞ when include_infinity). The grid evaluations are
/// independent and run under `exec`.
FrequencyReport check_frequency_domain(const KypProblem& prob, const Vector& lambda,
                                       const std::vector<double>& omega_grid,
                                       bool include_infinity = true, Exec exec = Exec::parallel,
                                       double axis_tol_rel = 1e-8);

enum class FrequencyVerdict { no_violation, violation, inconclusive };

struct ViolationSearch {
  FrequencyVerdict verdict = FrequencyVerdict::inconclusive;
  FrequencyReport report;
  int refinements = 0;
};

/// Looks for a sampled violation (margin ≤ 0). Sampling cannot prove that none
/// exists: when the default 200-point grid finds nothing, the density is raised
/// ×4 up to twice before the result is reported as inconclusive. With
/// `expect_violation == false` the default grid alone decides.
ViolationSearch search_frequency_violation(const KypProblem& prob, const Vector& lambda,
                                           bool expect_violation, Exec exec = Exec::parallel);

struct EquivalenceReport {
  bool ok = false;
  double epsilon = 0.0;
  int halvings = 0;
  Matrix P;       // P_+ − εH
  Matrix H;       // (A − BK_+)ᵀH + H(A − BK_+) = I
  double lmi_margin = 0.0;
  std::string message;
};

/// Builds a strictly LMI-feasible P ≺ P_+ from the antistabilizing solution
/// (after one Newton refinement step) by halving ε from 1 (at most 60 times) until check_kyp_lmi(P_+ − εH) > 0 and
/// P_+ − εH ≻ 0.
EquivalenceReport equivalence_probe(const KypProblem& prob, const Vector& lambda,
                                    const PairOptions& opts = {});

struct FdReport {
  double first_rel_err = 0.0;
  double second_rel_err = 0.0;
  bool skipped = false;  // a probe λ ± h e_i left the domain
  std::string message;
};

/// Central differences of P_± and of the first derivatives against the
/// analytic derivatives. Errors are entrywise maxima scaled by 1 + ‖P_±‖_F
/// (first order) and 1 + ‖∂_jP_±‖_F (second order); h_i = h(1 + |λ_i|).
FdReport fd_check(const KypProblem& prob, const Vector& lambda, double h = 1e-5,
                  const PairOptions& opts = {});

struct GridOptimum {
  double lambda = 0.0;
  double objective = 0.0;
  int feasible_points = 0;
};

/// Brute-force minimizer of cλ − tr ΣP_+(λ) for p = 1 over a uniform grid on
/// [lo, hi] with one 10× refinement around the best point. Uses two
/// independent Riccati solves per point. Throws NoFeasiblePoint.
GridOptimum grid_search_oracle(const KypProblem& prob, double lo, double hi, int steps);

}  // namespace kyp
