// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "kyp/cli.hpp"
#include "kyp/problem_io.hpp"
#include "kyp/synthesis.hpp"
#include "kyp/verification.hpp"
#include "test_support.hpp"

using namespace kyp;
using namespace kyp::testing;

namespace {

// Tolerances, all in one place.
constexpr double kS1Tol = 1e-3;
constexpr double kS1MaxSeconds = 1.0;
constexpr double kS1TMax = 1e6;
constexpr int kOracleInstances = 20;
constexpr int kOracleMaxN = 8;
constexpr int kOracleGridSteps = 4000;
constexpr double kOracleRelTol = 1e-3;
constexpr double kOracleMaxSeconds = 60.0;
constexpr int kFdInstances = 20;
constexpr double kFdFirstTol = 1e-5;
constexpr double kFdSecondTol = 1e-4;
// Step for the central differences, times (1 + |λ_i|). On the worse random
// instances P_± carry about 1e-10 relative noise, so 1e-5 would measure noise.
constexpr double kFdStep = 1e-4;
constexpr int kContractInstances = 50;
constexpr double kResidualTol = 1e-8;
constexpr double kDeltaTol = 1e-7;
constexpr double kSandwichSlack = -1e-8;
constexpr int kConvexityTriples = 50;
constexpr double kConvexitySlack = -1e-8;
constexpr int kRays = 10;
constexpr int kRaySamples = 30;
constexpr double kBoundaryLmiTol = 1e-7;
constexpr double kSlopeLo = 2.5;
constexpr double kSlopeHi = 3.8;
constexpr double kBenchMaxSeconds = 600.0;
constexpr int kPhase1Instances = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << "criterion " << id << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << " ("
            << o.detail << ")" << std::endl;
}

std::string num(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

bool strictly_feasible(const KypProblem& prob, const Vector& lam) {
  try {
    return feasibility_margins(prob, lam).strictly_feasible();
  } catch (const KypError&) {
    return false;
  }
}

Outcome scalar_optimum() {
  SolverConfig cfg;
  cfg.t_max = kS1TMax;
  const auto t0 = Clock::now();
  const SolveReport rep = solve(scalar_s1(), vec1(1.0), cfg);
  const double secs = seconds_since(t0);
  const double dobj = std::abs(rep.objective + 0.25);
  const double dlam = std::abs(rep.lambda_opt(0) - 0.25);
  return {rep.status == SolveStatus::optimal && dobj <= kS1Tol && dlam <= kS1Tol &&
              secs < kS1MaxSeconds,
          "objective err " + num(dobj) + ", lambda err " + num(dlam) + ", " + num(secs) + " s"};
}

Outcome grid_equivalence() {
  std::mt19937_64 rng(2001);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int ok = 0;
  for (int k = 0; k < kOracleInstances; ++k) {
    const RandomInstance inst = random_feasible_instance(rng, 1 + k % kOracleMaxN, 1 + k % 3, 1);
    const SolveReport rep = solve(inst.prob, inst.lambda);
    const GridOptimum g =
        grid_search_oracle(inst.prob, inst.lo(0), inst.hi(0), kOracleGridSteps);
    const double rel = std::abs(rep.objective - g.objective) / std::max(1.0, std::abs(g.objective));
    worst = std::max(worst, rel);
    if (rep.status == SolveStatus::optimal && rel <= kOracleRelTol) ++ok;
  }
  const double secs = seconds_since(t0);
  return {ok == kOracleInstances && secs < kOracleMaxSeconds,
          std::to_string(ok) + "/" + std::to_string(kOracleInstances) + " within tolerance, worst rel " +
              num(worst) + ", " + num(secs) + " s"};
}

Outcome derivative_fd() {
  std::mt19937_64 rng(2002);
  double w1 = 0.0, w2 = 0.0;
  int ok = 0;
  for (int k = 0; k < kFdInstances; ++k) {
    const RandomInstance inst = random_feasible_instance(rng, 1 + k % 10, 1 + k % 3, 1 + k % 4);
    const FdReport fd = fd_check(inst.prob, inst.lambda, kFdStep);
    if (fd.skipped) continue;
    w1 = std::max(w1, fd.first_rel_err);
    w2 = std::max(w2, fd.second_rel_err);
    if (fd.first_rel_err <= kFdFirstTol && fd.second_rel_err <= kFdSecondTol) ++ok;
  }
  return {ok == kFdInstances, std::to_string(ok) + "/" + std::to_string(kFdInstances) +
                                  ", worst first " + num(w1) + ", worst second " + num(w2)};
}

Outcome solver_contracts() {
  std::mt19937_64 rng(2003);
  double worst_res = 0.0, worst_delta = 0.0;
  int ok = 0;
  for (int k = 0; k < kContractInstances; ++k) {
    const RandomInstance inst = random_feasible_instance(rng, 1 + k % 12, 1 + k % 4, 1 + k % 3);
    const KypProblem& pr = inst.prob;
    const Matrix Q = pr.Q.evaluate(inst.lambda), S = pr.S.evaluate(inst.lambda),
                 R = pr.R.evaluate(inst.lambda);
    double res = 0.0;
    for (RiccatiMode mode : {RiccatiMode::stabilizing, RiccatiMode::antistabilizing}) {
      const RiccatiSolution sol = solve_riccati(pr.A, pr.B, Q, S, R, mode);
      res = std::max(res, riccati_residual(pr.A, pr.B, Q, S, R, sol.P).norm() /
                              riccati_residual_scale(pr.A, pr.B, Q, R, sol.P));
    }
    PairOptions two, lyap;
    two.strategy = PairStrategy::two_solves;
    lyap.strategy = PairStrategy::lyapunov_shortcut;
    const RiccatiPair a = compute_pair(pr, inst.lambda, two);
    const RiccatiPair b = compute_pair(pr, inst.lambda, lyap);
    const double dd = (a.Delta - b.Delta).norm() / (1.0 + a.Delta.norm());
    worst_res = std::max(worst_res, res);
    worst_delta = std::max(worst_delta, dd);
    if (res <= kResidualTol && dd <= kDeltaTol) ++ok;
  }
  return {ok == kContractInstances, std::to_string(ok) + "/" + std::to_string(kContractInstances) +
                                        ", worst residual " + num(worst_res) + ", worst Delta gap " +
                                        num(worst_delta)};
}

Outcome order_positivity() {
  std::mt19937_64 rng(2004);
  double worst = INFINITY, worst_delta = INFINITY;
  int ok = 0, total = 0;
  for (int k = 0; k < kContractInstances; ++k) {
    const RandomInstance inst = random_feasible_instance(rng, 1 + k % 10, 1 + k % 3, 1 + k % 3);
    const RiccatiPair pair = compute_pair(inst.prob, inst.lambda);
    const EquivalenceReport eq = equivalence_probe(inst.prob, inst.lambda);
    ++total;
    if (!eq.ok) continue;
    const double lo = min_eig(eq.P - pair.P_minus);
    const double hi = min_eig(pair.P_plus - eq.P);
    const double dmin = min_eig(pair.Delta);
    worst = std::min({worst, lo, hi});
    worst_delta = std::min(worst_delta, dmin);
    if (lo >= kSandwichSlack && hi >= kSandwichSlack && dmin > 0.0) ++ok;
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + ", worst sandwich slack " +
                           num(worst) + ", min eig Delta " + num(worst_delta)};
}

Outcome concavity() {
  std::mt19937_64 rng(2005);
  double worst = INFINITY;
  int ok = 0, done = 0;
  while (done < kConvexityTriples) {
    const int p = 1 + done % 3;
    const RandomInstance inst = random_feasible_instance(rng, 2 + done % 7, 1 + done % 2, p);
    Vector l1 = inst.lambda, l2 = inst.lambda;
    for (int i = 0; i < p; ++i) {
      l1(i) += uniform(rng, -0.25, 0.25);
      l2(i) += uniform(rng, -0.25, 0.25);
    }
    RiccatiPair a, b, c;
    const double alpha = uniform(rng, 0.05, 0.95);
    try {
      a = compute_pair(inst.prob, l1);
      b = compute_pair(inst.prob, l2);
      c = compute_pair(inst.prob, alpha * l1 + (1 - alpha) * l2);
    } catch (const KypError&) {
      continue;  // a draw outside the domain is not a triple
    }
    ++done;
    const double scale =
        1.0 + std::max({a.P_plus.norm(), b.P_plus.norm(), a.P_minus.norm(), b.P_minus.norm()});
    const double cav = min_eig(c.P_plus - alpha * a.P_plus - (1 - alpha) * b.P_plus) / scale;
    const double vex = min_eig(alpha * a.P_minus + (1 - alpha) * b.P_minus - c.P_minus) / scale;
    worst = std::min({worst, cav, vex});
    if (cav >= kConvexitySlack && vex >= kConvexitySlack) ++ok;
  }
  return {ok == kConvexityTriples,
          std::to_string(ok) + "/" + std::to_string(kConvexityTriples) + ", worst scaled slack " +
              num(worst)};
}

Outcome barrier_blowup() {
  std::mt19937_64 rng(2006);
  int ok = 0;
  for (int k = 0; k < kRays; ++k) {
    const int p = 1 + k % 3;
    const RandomInstance inst = random_feasible_instance(rng, 2 + k % 6, 1 + k % 2, p);
    Vector d = randn(rng, p, 1);
    d /= d.norm();
    // Bisect for the boundary along the ray. The feasible set is convex.
    double in = 0.0, out = 1.0;
    while (strictly_feasible(inst.prob, inst.lambda + out * d)) out *= 2.0;
    for (int it = 0; it < 200 && out - in > 1e-15 * (1.0 + out); ++it) {
      const double mid = 0.5 * (in + out);
      (strictly_feasible(inst.prob, inst.lambda + mid * d) ? in : out) = mid;
    }
    std::vector<double> v;
    for (int s = 1; s <= kRaySamples; ++s) {
      const double step = in * (1.0 - std::pow(0.5, s));
      try {
        v.push_back(evaluate_barrier(inst.prob, inst.lambda + step * d, 1.0).value);
      } catch (const KypError&) {
        break;
      }
    }
    const std::size_t m = v.size();
    if (m >= 3 && v[m - 3] < v[m - 2] && v[m - 2] < v[m - 1]) ++ok;
  }
  return {ok == kRays, std::to_string(ok) + "/" + std::to_string(kRays) + " rays increasing"};
}

Outcome synthesis_certificate() {
  const std::string prefix = "acceptance_chain4";
  std::ostringstream out, err;
  const int code = cli::run({"synth", "--chain", "4", "--gamma", "0.25", "--out", prefix}, out, err);
  if (code != cli::kOk) return {false, "synth exit " + std::to_string(code) + ": " + err.str()};
  const ProblemFile pf = load_problem(prefix + ".problem.json");
  const ReportFile rf = load_report(prefix + ".report.json");

  const FrequencyReport fr =
      check_frequency_domain(pf.problem, rf.lambda_opt, log_frequency_grid(200), true);
  // The eliminated constraint rebuilt from the plant: outerᵀ·[0 P; P 0]·outer − LᵀDL ⪯ 0.
  const ChainPlant cp = generate_mass_spring_chain(4);
  const SynthesisSpec spec = build_actuator_uncertainty(cp.A, cp.B1, 0.25);
  const PlantModel& pl = spec.plant;
  const int n = pl.n(), l = pl.l();
  Matrix outer = Matrix::Zero(2 * n, 2 * n + l);
  outer.topLeftCorner(n, n) = pl.A.transpose();
  outer.block(0, n, n, n) = Matrix::Identity(n, n);
  outer.block(0, 2 * n, n, l) = pl.C.transpose();
  outer.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
  Matrix center = Matrix::Zero(2 * n, 2 * n);
  center.topRightCorner(n, n) = rf.P_plus;
  center.bottomLeftCorner(n, n) = rf.P_plus;
  const Matrix L = elimination_matrix(pl);
  const Matrix elim = outer.transpose() * center * outer -
                      L.transpose() * elimination_weight(spec, rf.lambda_opt) * L;
  const double elim_margin = -max_eig(elim);
  const double lmi = check_kyp_lmi(pf.problem, rf.lambda_opt, rf.P_plus);
  std::remove((prefix + ".problem.json").c_str());
  std::remove((prefix + ".report.json").c_str());

  const bool pass = rf.status == "optimal" && fr.margin > 0.0 && fr.evaluated == 201 &&
                    elim_margin >= -kBoundaryLmiTol && lmi >= -kBoundaryLmiTol;
  return {pass, "objective " + num(rf.objective) + ", frequency margin " + num(fr.margin) + " over " +
                    std::to_string(fr.evaluated) + " points, eliminated LMI margin " +
                    num(elim_margin) + ", KYP LMI margin " + num(lmi)};
}

Outcome complexity_scaling() {
  cli::BenchOptions opts;
  opts.sizes = {32, 64, 128, 256};
  const auto t0 = Clock::now();
  const auto rows = cli::run_bench(opts, &std::cout);
  const double secs = seconds_since(t0);
  const auto slope = cli::fit_loglog_slope(rows);
  if (!slope) return {false, "no slope"};
  return {*slope >= kSlopeLo && *slope <= kSlopeHi && secs < kBenchMaxSeconds,
          "slope " + num(*slope) + ", bench " + num(secs) + " s"};
}

Outcome phase1_soundness() {
  std::mt19937_64 rng(2010);
  int ok = 0;
  for (int k = 0; k < kPhase1Instances; ++k) {
    const RandomInstance inst = random_feasible_instance(rng, 2 + k % 6, 1 + k % 2, 1 + k % 3);
    const Phase1Result ph = phase1(inst.prob);
    if (!ph.feasible) continue;
    const FeasibilityMargins fm = feasibility_margins(inst.prob, ph.lambda);
    if (fm.in_domain && fm.neg_R > 0 && fm.N > 0 && fm.P_plus > 0 && fm.Delta > 0) ++ok;
  }

  KypProblem bad = scalar_s1();
  bad.N = AffineMatrixFamily(Matrix::Zero(1, 1), {-Matrix::Ones(1, 1)}, true);
  ProblemFile f;
  f.problem = bad;
  const std::string path = "acceptance_infeasible.json";
  const std::string rpath = "acceptance_infeasible.report.json";
  save_problem(path, f);
  std::ostringstream out, err;
  const int code = cli::run({"solve", path, "--out", rpath}, out, err);
  double lambda0 = NAN;
  if (code == cli::kInfeasible) lambda0 = load_report(rpath).extra.at("lambda0").get<double>();
  std::remove(path.c_str());
  std::remove(rpath.c_str());

  return {ok == kPhase1Instances && code == cli::kInfeasible && lambda0 >= 0.0,
          std::to_string(ok) + "/" + std::to_string(kPhase1Instances) +
              " interior points, infeasible instance exit " + std::to_string(code) +
              ", lambda0 " + num(lambda0)};
}

}  // namespace

int main() {
  report(1, "scalar optimum", scalar_optimum);
  report(2, "grid-search equivalence", grid_equivalence);
  report(3, "derivatives vs finite differences", derivative_fd);
  report(4, "Riccati and Lyapunov contracts", solver_contracts);
  report(5, "order and positivity", order_positivity);
  report(6, "concavity and convexity", concavity);
  report(7, "barrier blow-up", barrier_blowup);
  report(8, "synthesis certificate", synthesis_certificate);
  report(9, "complexity scaling", complexity_scaling);
  report(10, "phase I soundness", phase1_soundness);
  std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL")
            << std::endl;
  return failures;
}
