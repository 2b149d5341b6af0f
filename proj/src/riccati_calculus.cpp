#include "kyp/riccati_calculus.hpp"

#include <sstream>

namespace kyp {

const char* to_string(Exec exec) { return exec == Exec::serial ? "serial" : "parallel"; }

const char* to_string(PairStrategy s) {
  return s == PairStrategy::two_solves ? "two_solves" : "lyapunov_shortcut";
}

int SymmetricTable::packed_index(int i, int j, int p) {
  if (i > j) std::swap(i, j);
  // rows 0..i−1 of the upper triangle hold p, p−1, … entries
  return i * p - i * (i - 1) / 2 + (j - i);
}

namespace {

Eigen::LLT<Matrix> factor_negated(const Matrix& R) {
  Eigen::LLT<Matrix> llt(-R);
  if (llt.info() != Eigen::Success) throw NotInDomain("R(lambda) is not negative definite");
  return llt;
}

Matrix invert_gap(const Matrix& Z, double y_cond_max) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(Z));
  const Vector& mu = eig.eigenvalues();
  const double lo = mu.cwiseAbs().minCoeff();
  const double hi = mu.cwiseAbs().maxCoeff();
  if (!(lo > 0.0) || hi / lo > y_cond_max) {
    std::ostringstream os;
    os << "gap matrix inverse is nearly singular (cond " << (lo > 0.0 ? hi / lo : INFINITY) << ")";
    throw NearSingularY(os.str());
  }
  const Matrix& V = eig.eigenvectors();
  return symmetrized(V * mu.cwiseInverse().asDiagonal() * V.transpose());
}

}  // namespace

Matrix delta_via_lyapunov(const LyapunovOperator& closed_loop, const Matrix& B, const Matrix& R,
                          double y_cond_max) {
  const Eigen::LLT<Matrix> llt = factor_negated(R);
  // B R⁻¹ Bᵀ = −Wᵀ W with W = L⁻¹Bᵀ
  const Matrix W = llt.matrixL().solve(B.transpose());
  const Matrix BRinvBt = -(W.transpose() * W);
  const Matrix Z = closed_loop.solve_transposed(-BRinvBt);
  return invert_gap(Z, y_cond_max);
}

Matrix delta_via_lyapunov(const Matrix& A, const Matrix& B, const Matrix& /*S*/, const Matrix& R,
                          const RiccatiSolution& P1, double y_cond_max, double axis_tol_rel) {
  const LyapunovOperator loop(A - B * P1.K, axis_tol_rel);
  return delta_via_lyapunov(loop, B, R, y_cond_max);
}

RiccatiPair compute_pair(const KypProblem& prob, const Vector& lambda, const PairOptions& opts) {
  RiccatiPair pair;
  pair.lambda = lambda;
  pair.Q = prob.Q.evaluate(lambda);
  pair.S = prob.S.evaluate(lambda);
  pair.R = prob.R.evaluate(lambda);
  pair.N = prob.N.evaluate(lambda);

  const Matrix& A = prob.A;
  const Matrix& B = prob.B;
  const RiccatiSolution minus =
      solve_riccati(A, B, pair.Q, pair.S, pair.R, RiccatiMode::stabilizing, opts.riccati);
  pair.counters.riccati += 1;
  pair.P_minus = minus.P;
  pair.K_minus = minus.K;

  if (opts.strategy == PairStrategy::two_solves) {
    const RiccatiSolution plus =
        solve_riccati(A, B, pair.Q, pair.S, pair.R, RiccatiMode::antistabilizing, opts.riccati);
    pair.counters.riccati += 1;
    pair.P_plus = plus.P;
    pair.K_plus = plus.K;
    pair.Delta = symmetrized(pair.P_plus - pair.P_minus);
  } else {
    pair.loop_minus = std::make_shared<const LyapunovOperator>(A - B * pair.K_minus,
                                                               opts.riccati.axis_tol_rel);
    pair.Delta = delta_via_lyapunov(*pair.loop_minus, B, pair.R, opts.y_cond_max);
    pair.counters.lyapunov += 1;
    pair.P_plus = symmetrized(pair.P_minus + pair.Delta);
    if (pair.P_minus.norm() > opts.cancellation_max * pair.P_plus.norm()) {
      pair.P_plus = solve_riccati(A, B, pair.Q, pair.S, pair.R, RiccatiMode::antistabilizing,
                                  opts.riccati)
                        .P;
      pair.counters.riccati += 1;
    }
    pair.K_plus = riccati_gain(B, pair.S, pair.R, pair.P_plus);
  }
  return pair;
}

namespace {

struct BranchView {
  const Matrix* K;
  BranchFirst* out;
  const LyapunovOperator* loop;
};

}  // namespace

FirstDerivatives first_derivatives(const KypProblem& prob, const RiccatiPair& pair, Exec exec) {
  const int p = prob.p();
  const Matrix& A = prob.A;
  const Matrix& B = prob.B;

  FirstDerivatives out;
  out.loop_minus = pair.loop_minus
                       ? pair.loop_minus
                       : std::make_shared<const LyapunovOperator>(A - B * pair.K_minus);
  out.loop_plus = std::make_shared<const LyapunovOperator>(A - B * pair.K_plus);
  for (BranchFirst* b : {&out.plus, &out.minus}) {
    b->dP.resize(static_cast<std::size_t>(p));
    b->dK.resize(static_cast<std::size_t>(p));
  }
  const Eigen::LLT<Matrix> llt = factor_negated(pair.R);
  const BranchView branches[2] = {{&pair.K_plus, &out.plus, out.loop_plus.get()},
                                  {&pair.K_minus, &out.minus, out.loop_minus.get()}};

  for_each_index(2 * p, exec, [&](int task) {
    const BranchView& br = branches[task / p];
    const int i = task % p;
    const Matrix& K = *br.K;
    const Matrix& Qi = prob.Q.coeff(i);
    const Matrix& Si = prob.S.coeff(i);
    const Matrix& Ri = prob.R.coeff(i);
    const Matrix SiK = Si * K;
    const Matrix C = symmetrized(Qi - SiK - SiK.transpose() + K.transpose() * Ri * K);
    Matrix dP = br.loop->solve(C);
    // ∂K = R⁻¹(Bᵀ∂P + S_iᵀ − R_iK)
    Matrix dK = -llt.solve(B.transpose() * dP + Si.transpose() - Ri * K);
    br.out->dP[static_cast<std::size_t>(i)] = std::move(dP);
    br.out->dK[static_cast<std::size_t>(i)] = std::move(dK);
  });
  out.counters.lyapunov = 2L * p;
  return out;
}

SecondDerivatives second_derivatives(const KypProblem& prob, const RiccatiPair& pair,
                                     const FirstDerivatives& firsts, Exec exec) {
  const int p = prob.p();
  SecondDerivatives out;
  out.plus = SymmetricTable(p);
  out.minus = SymmetricTable(p);
  const int entries = out.plus.entries();

  std::vector<std::pair<int, int>> index(static_cast<std::size_t>(entries));
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      index[static_cast<std::size_t>(SymmetricTable::packed_index(i, j, p))] = {i, j};
    }
  }
  const LyapunovOperator* loops[2] = {firsts.loop_plus.get(), firsts.loop_minus.get()};
  const BranchFirst* branch_first[2] = {&firsts.plus, &firsts.minus};
  SymmetricTable* tables[2] = {&out.plus, &out.minus};

  for_each_index(2 * entries, exec, [&](int task) {
    const int b = task / entries;
    const int k = task % entries;
    const auto [i, j] = index[static_cast<std::size_t>(k)];
    const Matrix& dKi = branch_first[b]->dK[static_cast<std::size_t>(i)];
    const Matrix& dKj = branch_first[b]->dK[static_cast<std::size_t>(j)];
    const Matrix cross = dKj.transpose() * pair.R * dKi;
    const Matrix C = -(cross + cross.transpose());
    tables[b]->packed(k) = loops[b]->solve(C);
  });
  out.counters.lyapunov = 2L * entries;
  return out;
}

DerivativeBundle compute_derivatives(const KypProblem& prob, const RiccatiPair& pair, Exec exec) {
  DerivativeBundle bundle;
  bundle.first = first_derivatives(prob, pair, exec);
  bundle.second = second_derivatives(prob, pair, bundle.first, exec);
  const int p = prob.p();
  bundle.dDelta.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const auto k = static_cast<std::size_t>(i);
    bundle.dDelta[k] = bundle.first.plus.dP[k] - bundle.first.minus.dP[k];
  }
  bundle.d2Delta = SymmetricTable(p);
  for (int k = 0; k < bundle.d2Delta.entries(); ++k) {
    bundle.d2Delta.packed(k) = bundle.second.plus.packed(k) - bundle.second.minus.packed(k);
  }
  bundle.counters = bundle.first.counters;
  bundle.counters += bundle.second.counters;
  return bundle;
}

}  // namespace kyp
