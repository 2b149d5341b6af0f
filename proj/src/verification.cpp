#include "kyp/verification.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "kyp/barrier_ipm.hpp"

namespace kyp {

namespace {

using CMatrix = Eigen::MatrixXcd;

double max_eig(const Matrix& X) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(X), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

double min_eig(const Matrix& X) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(X), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

}  // namespace

double check_kyp_lmi(const KypProblem& prob, const Vector& lambda, const Matrix& P) {
  const int n = prob.n();
  const int m = prob.m();
  // [A B; I 0]ᵀ [0 P; P 0] [A B; I 0] + [Q S; Sᵀ R]
  Matrix outer(2 * n, n + m);
  outer << prob.A, prob.B, Matrix::Identity(n, n), Matrix::Zero(n, m);
  Matrix center = Matrix::Zero(2 * n, 2 * n);
  center.topRightCorner(n, n) = P;
  center.bottomLeftCorner(n, n) = P;
  Matrix mult(n + m, n + m);
  const Matrix S = prob.S.evaluate(lambda);
  mult << prob.Q.evaluate(lambda), S, S.transpose(), prob.R.evaluate(lambda);
  const Matrix lmi = outer.transpose() * center * outer + mult;
  return -max_eig(lmi);
}

std::vector<double> log_frequency_grid(int points, double lo, double hi) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < points; ++k) {
    grid[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (points - 1));
  }
  return grid;
}

FrequencyReport check_frequency_domain(const KypProblem& prob, const Vector& lambda,
                                       const std::vector<double>& omega_grid,
                                       bool include_infinity, Exec exec, double axis_tol_rel) {
  const int n = prob.n();
  const Matrix Q = prob.Q.evaluate(lambda);
  const Matrix S = prob.S.evaluate(lambda);
  const Matrix R = prob.R.evaluate(lambda);
  const Eigen::VectorXcd eigA = Eigen::EigenSolver<Matrix>(prob.A, false).eigenvalues();
  const double axis_tol = axis_tol_rel * std::max(1.0, prob.A.norm());
  const CMatrix Ac = prob.A.cast<std::complex<double>>();
  const CMatrix Bc = prob.B.cast<std::complex<double>>();

  const int count = static_cast<int>(omega_grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> worst(static_cast<std::size_t>(count), nan);

  for_each_index(count, exec, [&](int k) {
    const double w = omega_grid[static_cast<std::size_t>(k)];
    const std::complex<double> iw(0.0, w);
    for (Eigen::Index e = 0; e < eigA.size(); ++e) {
      if (std::abs(eigA(e) - iw) <= axis_tol) return;  // skipped, stays NaN
    }
    // x = (iωI − A)⁻¹Bu is the response of ẋ = Ax + Bu at e^{iωt}
    CMatrix shifted = -Ac;
    shifted.diagonal().array() += iw;
    const CMatrix X = shifted.partialPivLu().solve(Bc);
    const CMatrix SX = S.transpose().cast<std::complex<double>>() * X;
    CMatrix phi = X.adjoint() * Q.cast<std::complex<double>>() * X + SX + SX.adjoint() +
                  R.cast<std::complex<double>>();
    phi = 0.5 * (phi + phi.adjoint()).eval();
    worst[static_cast<std::size_t>(k)] =
        Eigen::SelfAdjointEigenSolver<CMatrix>(phi, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  });

  FrequencyReport rep;
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    const double v = worst[static_cast<std::size_t>(k)];
    if (std::isnan(v)) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    if (v > top) {
      top = v;
      rep.worst_omega = omega_grid[static_cast<std::size_t>(k)];
    }
  }
  if (include_infinity) {
    ++rep.evaluated;
    const double v = max_eig(R);
    if (v > top) {
      top = v;
      rep.worst_omega = std::numeric_limits<double>::infinity();
    }
  }
  (void)n;
  rep.margin = -top;
  return rep;
}

ViolationSearch search_frequency_violation(const KypProblem& prob, const Vector& lambda,
                                           bool expect_violation, Exec exec) {
  ViolationSearch out;
  int points = 200;
  for (int round = 0; round < 3; ++round) {
    out.refinements = round;
    out.report = check_frequency_domain(prob, lambda, log_frequency_grid(points), true, exec);
    if (out.report.margin <= 0.0) {
      out.verdict = FrequencyVerdict::violation;
      return out;
    }
    if (!expect_violation) {
      out.verdict = FrequencyVerdict::no_violation;
      return out;
    }
    points *= 4;
  }
  out.verdict = FrequencyVerdict::inconclusive;
  return out;
}

EquivalenceReport equivalence_probe(const KypProblem& prob, const Vector& lambda,
                                    const PairOptions& opts) {
  EquivalenceReport rep;
  RiccatiPair pair;
  try {
    pair = compute_pair(prob, lambda, opts);
    const int n = prob.n();
    // One Newton step on P_+. The witness window in ε can sit below the
    // residual of the raw solve when ‖P_+‖ is large.
    const Matrix res = riccati_residual(prob.A, prob.B, pair.Q, pair.S, pair.R, pair.P_plus);
    const Matrix refined =
        symmetrized(pair.P_plus + solve_lyapunov(prob.A - prob.B * pair.K_plus, res));
    if (riccati_residual(prob.A, prob.B, pair.Q, pair.S, pair.R, refined).norm() < res.norm()) {
      pair.P_plus = refined;
      pair.K_plus = riccati_gain(prob.B, pair.S, pair.R, refined);
    }
    rep.H = solve_lyapunov(prob.A - prob.B * pair.K_plus, -Matrix::Identity(n, n));
  } catch (const KypError& e) {
    rep.message = std::string("no antistabilizing solution: ") + e.what();
    return rep;
  }
  double eps = 1.0;
  for (int k = 0; k <= 60; ++k, eps *= 0.5) {
    const Matrix P = pair.P_plus - eps * rep.H;
    const double margin = check_kyp_lmi(prob, lambda, P);
    if (margin > 0.0 && min_eig(P) > 0.0) {
      rep.ok = true;
      rep.epsilon = eps;
      rep.halvings = k;
      rep.P = P;
      rep.lmi_margin = margin;
      return rep;
    }
  }
  rep.halvings = 60;
  rep.message = "no strictly feasible witness within 60 halvings";
  return rep;
}

FdReport fd_check(const KypProblem& prob, const Vector& lambda, double h,
                  const PairOptions& opts) {
  FdReport rep;
  const int p = prob.p();
  RiccatiPair pair;
  DerivativeBundle bundle;
  try {
    pair = compute_pair(prob, lambda, opts);
    bundle = compute_derivatives(prob, pair, Exec::serial);
  } catch (const KypError& e) {
    rep.skipped = true;
    rep.message = e.what();
    return rep;
  }
  const double scale_plus = 1.0 + pair.P_plus.norm();
  const double scale_minus = 1.0 + pair.P_minus.norm();

  for (int i = 0; i < p; ++i) {
    const double hi = h * (1.0 + std::abs(lambda(i)));
    Vector up = lambda;
    Vector dn = lambda;
    up(i) += hi;
    dn(i) -= hi;
    RiccatiPair pu, pd;
    FirstDerivatives fu, fd;
    try {
      pu = compute_pair(prob, up, opts);
      pd = compute_pair(prob, dn, opts);
      fu = first_derivatives(prob, pu, Exec::serial);
      fd = first_derivatives(prob, pd, Exec::serial);
    } catch (const KypError& e) {
      rep.skipped = true;
      rep.message = std::string("probe left the domain: ") + e.what();
      return rep;
    }
    const auto k = static_cast<std::size_t>(i);
    const Matrix fd_plus = (pu.P_plus - pd.P_plus) / (2.0 * hi);
    const Matrix fd_minus = (pu.P_minus - pd.P_minus) / (2.0 * hi);
    rep.first_rel_err =
        std::max({rep.first_rel_err,
                  (fd_plus - bundle.first.plus.dP[k]).cwiseAbs().maxCoeff() / scale_plus,
                  (fd_minus - bundle.first.minus.dP[k]).cwiseAbs().maxCoeff() / scale_minus});
    for (int j = 0; j < p; ++j) {
      const auto l = static_cast<std::size_t>(j);
      const Matrix fd2_plus = (fu.plus.dP[l] - fd.plus.dP[l]) / (2.0 * hi);
      const Matrix fd2_minus = (fu.minus.dP[l] - fd.minus.dP[l]) / (2.0 * hi);
      const double sp = 1.0 + bundle.first.plus.dP[l].norm();
      const double sm = 1.0 + bundle.first.minus.dP[l].norm();
      rep.second_rel_err =
          std::max({rep.second_rel_err,
                    (fd2_plus - bundle.d2P_plus(i, j)).cwiseAbs().maxCoeff() / sp,
                    (fd2_minus - bundle.d2P_minus(i, j)).cwiseAbs().maxCoeff() / sm});
    }
  }
  return rep;
}

GridOptimum grid_search_oracle(const KypProblem& prob, double lo, double hi, int steps) {
  if (prob.p() != 1) throw std::invalid_argument("grid_search_oracle needs p = 1");
  if (!(hi > lo) || steps < 1) throw std::invalid_argument("grid_search_oracle: bad grid");
  PairOptions opts;
  opts.strategy = PairStrategy::two_solves;

  GridOptimum best;
  best.objective = std::numeric_limits<double>::infinity();
  bool found = false;
  auto probe = [&](double x) {
    Vector lam(1);
    lam(0) = x;
    try {
      if (min_eig(prob.N.evaluate(lam)) <= 0.0) return;
      if (max_eig(prob.R.evaluate(lam)) >= 0.0) return;
      const RiccatiPair pair = compute_pair(prob, lam, opts);
      if (min_eig(pair.P_plus) <= 0.0 || min_eig(pair.Delta) <= 0.0) return;
      ++best.feasible_points;
      const double v = prob.c(0) * x - prob.Sigma.cwiseProduct(pair.P_plus).sum();
      if (v < best.objective) {
        best.objective = v;
        best.lambda = x;
        found = true;
      }
    } catch (const KypError&) {
    }
  };
  const double step = (hi - lo) / steps;
  for (int k = 0; k <= steps; ++k) probe(lo + step * k);
  if (!found) throw NoFeasiblePoint("grid search found no feasible point");
  const double center = best.lambda;
  for (int k = -10; k <= 10; ++k) {
    const double x = center + 0.1 * step * k;
    if (x >= lo && x <= hi) probe(x);
  }
  return best;
}

}  // namespace kyp
