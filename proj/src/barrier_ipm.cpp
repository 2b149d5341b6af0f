#include "kyp/barrier_ipm.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace kyp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::LLT<Matrix> factor_pd(const Matrix& X, const char* name) {
  Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) {
    throw OutOfDomain(std::string(name) + " is not positive definite");
  }
  return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// L⁻¹ Y L⁻ᵀ for symmetric Y and X = LLᵀ.
Matrix whiten(const Eigen::LLT<Matrix>& llt, const Matrix& Y) {
  const Matrix T = llt.matrixL().solve(Y);
  return symmetrized(llt.matrixL().solve(T.transpose()));
}

double trace_product(const Matrix& X, const Matrix& Y) { return X.cwiseProduct(Y).sum(); }

/// One −log det X(λ) barrier: whitened first derivatives W_i = L⁻¹∂_iX L⁻ᵀ.
struct LogDetTerm {
  Eigen::LLT<Matrix> llt;
  std::vector<Matrix> W;
};

LogDetTerm make_term(const Matrix& X, const std::vector<Matrix>& dX, const char* name, Exec exec) {
  LogDetTerm term{factor_pd(X, name), std::vector<Matrix>(dX.size())};
  for_each_index(static_cast<int>(dX.size()), exec, [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    term.W[k] = whiten(term.llt, dX[k]);
  });
  return term;
}

std::vector<Matrix> negated(const std::vector<Matrix>& xs) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (const Matrix& x : xs) out.push_back(-x);
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  std::ostringstream os;
  if (!(t_max > 0.0)) os << "t_max must be positive; ";
  if (t0 && !(*t0 > 0.0)) os << "t0 must be positive; ";
  if (t0 && *t0 > t_max) os << "t0 must not exceed t_max; ";
  if (!(t_factor > 1.0)) os << "t_factor must exceed 1; ";
  if (!(ls_backtrack > 0.0 && ls_backtrack < 1.0)) os << "ls_backtrack must lie in (0,1); ";
  if (!(ls_slope > 0.0 && ls_slope < 0.5)) os << "ls_slope must lie in (0,0.5); ";
  if (!(newton_tol > 0.0)) os << "newton_tol must be positive; ";
  if (max_newton_iters < 1) os << "max_newton_iters must be positive; ";
  if (ls_max_steps < 1) os << "ls_max_steps must be positive; ";
  if (!os.str().empty()) throw std::invalid_argument("SolverConfig: " + os.str());
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::max_iters:
      return "max_iters";
    case SolveStatus::domain_error:
      return "domain_error";
  }
  return "domain_error";
}

double objective_value(const KypProblem& prob, const Vector& lambda, const Matrix& P_plus) {
  return prob.c.dot(lambda) - trace_product(prob.Sigma, P_plus);
}

BarrierValue evaluate_barrier(const KypProblem& prob, const Vector& lambda, double t,
                              const PairOptions& opts) {
  BarrierValue out;
  {
    // R ≺ 0 and N ≻ 0 are cheap; test them before any Riccati solve.
    const Matrix R = prob.R.evaluate(lambda);
    const Matrix N = prob.N.evaluate(lambda);
    factor_pd(-R, "-R(lambda)");
    factor_pd(N, "N(lambda)");
  }
  try {
    out.pair = compute_pair(prob, lambda, opts);
  } catch (const NotInDomain& e) {
    throw OutOfDomain(std::string("lambda outside the Riccati domain: ") + e.what());
  }
  const RiccatiPair& pr = out.pair;
  const double barrier = -log_det(factor_pd(pr.N, "N(lambda)")) -
                         log_det(factor_pd(pr.P_plus, "P_plus(lambda)")) -
                         log_det(factor_pd(-pr.R, "-R(lambda)")) -
                         log_det(factor_pd(pr.Delta, "Delta(lambda)"));
  out.objective = objective_value(prob, lambda, pr.P_plus);
  out.value = t * out.objective + barrier;
  return out;
}

Vector gradient(const KypProblem& prob, const RiccatiPair& pair, const DerivativeBundle& bundle,
                double t) {
  const int p = prob.p();
  const auto nP = make_term(pair.P_plus, bundle.dP_plus(), "P_plus(lambda)", Exec::serial);
  const auto nD = make_term(pair.Delta, bundle.dDelta, "Delta(lambda)", Exec::serial);
  const auto nR = make_term(-pair.R, negated(prob.R.coeffs()), "-R(lambda)", Exec::serial);
  const auto nN = make_term(pair.N, prob.N.coeffs(), "N(lambda)", Exec::serial);

  Vector g(p);
  for (int i = 0; i < p; ++i) {
    const auto k = static_cast<std::size_t>(i);
    g(i) = t * (prob.c(i) - trace_product(prob.Sigma, bundle.dP_plus()[k])) - nD.W[k].trace() -
           nP.W[k].trace() - nR.W[k].trace() - nN.W[k].trace();
  }
  return g;
}

Matrix hessian(const KypProblem& prob, const RiccatiPair& pair, const DerivativeBundle& bundle,
               double t, HessianForm form, Exec exec) {
  const int p = prob.p();
  const double q = form == HessianForm::exact ? 1.0 : 2.0;
  const auto nP = make_term(pair.P_plus, bundle.dP_plus(), "P_plus(lambda)", exec);
  const auto nD = make_term(pair.Delta, bundle.dDelta, "Delta(lambda)", exec);
  const auto nR = make_term(-pair.R, negated(prob.R.coeffs()), "-R(lambda)", exec);
  const auto nN = make_term(pair.N, prob.N.coeffs(), "N(lambda)", exec);

  const int entries = p * (p + 1) / 2;
  std::vector<double> packed(static_cast<std::size_t>(entries));
  std::vector<std::pair<int, int>> index(static_cast<std::size_t>(entries));
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      index[static_cast<std::size_t>(SymmetricTable::packed_index(i, j, p))] = {i, j};
    }
  }
  for_each_index(entries, exec, [&](int k) {
    const auto [i, j] = index[static_cast<std::size_t>(k)];
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(j);
    const Matrix& d2P = bundle.d2P_plus(i, j);
    const Matrix& d2D = bundle.d2Delta.at(i, j);
    double h = -t * trace_product(prob.Sigma, d2P);
    h += q * trace_product(nP.W[a], nP.W[b]) - whiten(nP.llt, d2P).trace();
    h += q * trace_product(nD.W[a], nD.W[b]) - whiten(nD.llt, d2D).trace();
    h += q * trace_product(nR.W[a], nR.W[b]);
    h += q * trace_product(nN.W[a], nN.W[b]);
    packed[static_cast<std::size_t>(k)] = h;
  });

  Matrix H(p, p);
  for (int k = 0; k < entries; ++k) {
    const auto [i, j] = index[static_cast<std::size_t>(k)];
    H(i, j) = H(j, i) = packed[static_cast<std::size_t>(k)];
  }
  return H;
}

NewtonStep newton_step(const Vector& grad, const Matrix& hess) {
  NewtonStep step;
  const Eigen::Index p = grad.size();
  if (grad.norm() == 0.0) {
    step.direction = Vector::Zero(p);
    return step;
  }
  const double scale = 1.0 + hess.diagonal().cwiseAbs().maxCoeff();
  double shift = 0.0;
  for (int attempt = 0; attempt < 5; ++attempt) {
    const Matrix Hs = hess + shift * Matrix::Identity(p, p);
    const Eigen::LLT<Matrix> llt(Hs);
    if (llt.info() == Eigen::Success) {
      Vector d = -llt.solve(grad);
      const double gd = grad.dot(d);
      if (d.allFinite() && gd < 0.0) {
        step.direction = std::move(d);
        step.decrement = std::sqrt(-gd);
        return step;
      }
    }
    shift = shift == 0.0 ? 1e-12 * scale : shift * 1e2;
  }
  step.direction = -grad;
  step.decrement = grad.norm();
  step.gradient_fallback = true;
  return step;
}

NewtonStep newton_step(const IterateState& state) { return newton_step(state.grad, state.hess); }

LineSearchResult line_search(const KypProblem& prob, const Vector& lambda, const Vector& d,
                             double t, double v0, double slope, const SolverConfig& cfg) {
  LineSearchResult res;
  double alpha = 1.0;
  for (int step = 0; step < cfg.ls_max_steps; ++step, alpha *= cfg.ls_backtrack) {
    ++res.probes;
    const Vector trial = lambda + alpha * d;
    try {
      BarrierValue bv = evaluate_barrier(prob, trial, t, cfg.pair);
      res.counters += bv.pair.counters;
      if (bv.value <= v0 + cfg.ls_slope * alpha * slope) {
        res.alpha = alpha;
        res.at = std::move(bv);
        return res;
      }
    } catch (const OutOfDomain&) {
      ++res.rejected_out_of_domain;
      res.counters.riccati += 1;
    } catch (const IllConditioned&) {
      ++res.rejected_out_of_domain;
      res.counters.riccati += 1;
    } catch (const NearSingularY&) {
      ++res.rejected_out_of_domain;
      res.counters.riccati += 1;
    } catch (const SingularPencil&) {
      ++res.rejected_out_of_domain;
      res.counters.riccati += 1;
    }
  }
  std::ostringstream os;
  os << "line search failed after " << cfg.ls_max_steps << " steps ("
     << res.rejected_out_of_domain << " outside the domain)";
  throw LineSearchFailed(os.str());
}

SolveReport solve(const KypProblem& prob, const Vector& lambda0, const SolverConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  SolveReport rep;
  rep.lambda_opt = lambda0;

  BarrierValue cur;
  try {
    cur = evaluate_barrier(prob, lambda0, 0.0, cfg.pair);
  } catch (const KypError& e) {
    rep.status = SolveStatus::domain_error;
    rep.message = std::string("initial point is not strictly feasible: ") + e.what();
    rep.seconds = seconds_since(start);
    return rep;
  }
  rep.riccati_solves += cur.pair.counters.riccati;
  rep.lyapunov_solves += cur.pair.counters.lyapunov;

  double t = cfg.t0 ? *cfg.t0 : 1.0 / (1.0 + std::abs(cur.objective));
  t = std::min(t, cfg.t_max);
  cur.value += t * cur.objective;  // evaluated at t = 0 above

  Vector lambda = lambda0;
  bool finished = false;
  rep.status = SolveStatus::optimal;

  auto finish = [&](SolveStatus status, std::string message) {
    rep.status = status;
    rep.message = std::move(message);
    finished = true;
  };

  while (!finished && t <= cfg.t_max * (1.0 + 1e-12)) {
    const auto stage_start = Clock::now();
    StageRecord stage;
    stage.t = t;
    bool converged = false;

    for (int it = 0; it < cfg.max_newton_iters && !finished; ++it) {
      if (cfg.max_total_iters > 0 && rep.newton_iters_total >= cfg.max_total_iters) {
        finish(SolveStatus::max_iters, "total Newton iteration budget exhausted");
        break;
      }
      const auto iter_start = Clock::now();
      NewtonStep step;
      try {
        const DerivativeBundle bundle = compute_derivatives(prob, cur.pair, cfg.exec);
        rep.lyapunov_solves += bundle.counters.lyapunov;
        const Vector g = gradient(prob, cur.pair, bundle, t);
        const Matrix H = hessian(prob, cur.pair, bundle, t, cfg.hessian, cfg.exec);
        step = newton_step(g, H);
      } catch (const KypError& e) {
        finish(SolveStatus::domain_error, std::string("derivative evaluation failed: ") + e.what());
        break;
      }
      if (step.gradient_fallback) ++rep.gradient_fallbacks;
      stage.decrement = step.decrement;
      rep.last_decrement = step.decrement;
      if (!step.gradient_fallback && step.decrement <= cfg.newton_tol) {
        converged = true;
        rep.newton_seconds += seconds_since(iter_start);
        break;
      }
      // Predicted decrease below the evaluation noise of v_t: the stage is as
      // converged as the arithmetic allows. The objective is then within
      // noise / t of the stage minimizer.
      if (!step.gradient_fallback &&
          0.5 * step.decrement * step.decrement <= kRoundoffNoise * (1.0 + std::abs(cur.value))) {
        converged = true;
        stage.roundoff_stall = true;
        rep.newton_seconds += seconds_since(iter_start);
        break;
      }

      const double slope = -step.decrement * step.decrement;
      const double directional =
          step.gradient_fallback ? -step.direction.squaredNorm() : slope;
      LineSearchResult ls;
      try {
        ls = line_search(prob, lambda, step.direction, t, cur.value, directional, cfg);
      } catch (const LineSearchFailed& e) {
        rep.newton_seconds += seconds_since(iter_start);
        finish(SolveStatus::domain_error, e.what());
        break;
      }
      rep.riccati_solves += ls.counters.riccati;
      rep.lyapunov_solves += ls.counters.lyapunov;
      // Armijo accepted a step that does not lower v_t in floating point: the
      // step is below the resolution of λ or of v_t.
      if (!(ls.at.value < cur.value)) {
        converged = true;
        stage.roundoff_stall = true;
        rep.newton_seconds += seconds_since(iter_start);
        break;
      }
      lambda += ls.alpha * step.direction;
      cur = std::move(ls.at);
      ++rep.newton_iters_total;
      ++stage.newton_iters;
      rep.newton_seconds += seconds_since(iter_start);

      if (cfg.early_stop && cfg.early_stop(lambda)) {
        finish(SolveStatus::optimal, "early stop");
      }
    }

    stage.objective = cur.objective;
    stage.seconds = seconds_since(stage_start);
    rep.history.push_back(stage);
    rep.t_final = t;
    if (finished) break;
    if (!converged) {
      finish(SolveStatus::max_iters, "Newton iteration limit reached in a stage");
      break;
    }
    const double barrier = cur.value - t * cur.objective;
    t *= cfg.t_factor;
    cur.value = t * cur.objective + barrier;
  }

  rep.lambda_opt = lambda;
  rep.P_plus_opt = cur.pair.P_plus;
  rep.objective = cur.objective;
  rep.seconds = seconds_since(start);
  return rep;
}

FeasibilityMargins feasibility_margins(const KypProblem& prob, const Vector& lambda,
                                       const PairOptions& opts) {
  FeasibilityMargins m;
  auto min_eig = [](const Matrix& X) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(X), Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  };
  const Matrix R = prob.R.evaluate(lambda);
  m.neg_R = min_eig(-R);
  m.N = min_eig(prob.N.evaluate(lambda));
  if (!(m.neg_R > 0.0)) return m;
  try {
    const RiccatiPair pair = compute_pair(prob, lambda, opts);
    m.P_plus = min_eig(pair.P_plus);
    m.Delta = min_eig(pair.Delta);
    m.in_domain = true;
  } catch (const KypError&) {
    m.in_domain = false;
  }
  return m;
}

KypProblem phase1_problem(const KypProblem& prob, double box) {
  const int n = prob.n();
  const int m = prob.m();
  const int r = prob.r();
  const int p = prob.p();
  auto augment = [](const AffineMatrixFamily& fam, Matrix shift) {
    std::vector<Matrix> coeffs;
    coeffs.reserve(fam.coeffs().size() + 1);
    coeffs.push_back(std::move(shift));
    for (const Matrix& c : fam.coeffs()) coeffs.push_back(c);
    return AffineMatrixFamily(fam.base(), std::move(coeffs), fam.symmetric());
  };
  KypProblem aug;
  aug.A = prob.A;
  aug.B = prob.B;
  aug.c = Vector::Zero(p + 1);
  aug.c(0) = 1.0;
  aug.Sigma = Matrix::Zero(n, n);
  aug.Q = augment(prob.Q, -Matrix::Identity(n, n));
  aug.S = augment(prob.S, Matrix::Zero(n, m));
  aug.R = augment(prob.R, -Matrix::Identity(m, m));

  // blockdiag(N + λ_0 I, diag(ρ − λ_i), diag(ρ + λ_i))
  const int rb = r + 2 * p;
  Matrix base = Matrix::Zero(rb, rb);
  base.topLeftCorner(r, r) = prob.N.base();
  base.diagonal().tail(2 * p).setConstant(box);
  std::vector<Matrix> coeffs;
  Matrix c0 = Matrix::Zero(rb, rb);
  c0.topLeftCorner(r, r).setIdentity();
  coeffs.push_back(c0);
  for (int i = 0; i < p; ++i) {
    Matrix ci = Matrix::Zero(rb, rb);
    ci.topLeftCorner(r, r) = prob.N.coeff(i);
    ci(r + i, r + i) = -1.0;
    ci(r + p + i, r + p + i) = 1.0;
    coeffs.push_back(ci);
  }
  aug.N = AffineMatrixFamily(base, std::move(coeffs), true);
  return aug;
}

namespace {

double max_sym_eig(const Matrix& X) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(X), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

}  // namespace

Phase1Result phase1(const KypProblem& prob, const SolverConfig& cfg) {
  const int p = prob.p();
  const Vector zero = Vector::Zero(p);
  const double shift0 =
      2.0 * std::max({0.0, max_sym_eig(prob.R.evaluate(zero)), max_sym_eig(-prob.N.evaluate(zero))});

  Phase1Result res;
  for (double box = kPhase1Box; box <= kPhase1BoxMax; box *= kPhase1BoxGrowth) {
    const KypProblem aug = phase1_problem(prob, box);
    res.box = box;
    res.start = Vector::Zero(p + 1);
    bool interior = false;
    double shift = shift0 > 0.0 ? shift0 : 1.0;
    for (int k = 0; k < 200; ++k, shift *= 2.0) {
      res.start(0) = shift;
      try {
        evaluate_barrier(aug, res.start, 1.0, cfg.pair);
        interior = true;
        break;
      } catch (const KypError&) {
      }
    }
    if (!interior) {
      res.report = SolveReport{};
      res.report.status = SolveStatus::domain_error;
      res.report.message = "no interior point of the shifted problem found";
      return res;
    }

    SolverConfig c1 = cfg;
    c1.t0.reset();
    // log-det orders of N, P_+, −R and Δ in the shifted problem
    const double order = aug.r() + 2.0 * aug.n() + aug.m();
    c1.t_max = std::max(cfg.t_max, order / kPhase1Tol);
    c1.early_stop = [&](const Vector& lt) {
      if (!(lt(0) < 0.0)) return false;
      return feasibility_margins(prob, lt.tail(p), cfg.pair).strictly_feasible();
    };
    res.report = solve(aug, res.start, c1);
    res.lambda0 = res.report.lambda_opt(0);
    const Vector candidate = res.report.lambda_opt.tail(p);
    if (res.lambda0 < 0.0 && feasibility_margins(prob, candidate, cfg.pair).strictly_feasible()) {
      res.feasible = true;
      res.lambda = candidate;
      return res;
    }
    if (res.report.status != SolveStatus::optimal) return res;
    // A phase-I optimum strictly inside the box is global, so λ_0 ≥ 0 certifies
    // infeasibility. Against the box it only says so for |λ_i| < ρ.
    const double box_margin = box - (p > 0 ? candidate.cwiseAbs().maxCoeff() : 0.0);
    if (box_margin > 1e-3 * box) {
      res.report.status = SolveStatus::infeasible;
      return res;
    }
  }
  res.report.status = SolveStatus::infeasible;
  res.report.message = "phase I optimum on the search box at its largest size";
  return res;
}

}  // namespace kyp
