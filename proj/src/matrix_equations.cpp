#include "kyp/matrix_equations.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <lapacke.h>

namespace kyp {

namespace {

lapack_logical select_left(const double* wr, const double* /*wi*/) { return *wr < 0.0; }
lapack_logical select_right(const double* wr, const double* /*wi*/) { return *wr > 0.0; }

struct SchurOutput {
  Matrix T;
  Matrix U;
  Vector wr;
  Vector wi;
  lapack_int sdim = 0;
};

SchurOutput run_dgees(const Matrix& M, LAPACK_D_SELECT2 select) {
  const auto n = static_cast<lapack_int>(M.rows());
  SchurOutput out;
  out.T = M;
  out.U.resize(n, n);
  out.wr.resize(n);
  out.wi.resize(n);
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', select ? 'S' : 'N', select, n, out.T.data(), n,
                    &out.sdim, out.wr.data(), out.wi.data(), out.U.data(), n);
  if (info < 0) throw KypError("dgees: illegal argument " + std::to_string(-info));
  if (info > 0 && info <= n) throw IllConditioned("dgees: QR iteration failed to converge");
  if (info == n + 1) throw IllConditioned("dgees: eigenvalues too close to reorder");
  if (info == n + 2) throw IllConditioned("dgees: reordering changed the selected eigenvalues");
  return out;
}

Eigen::VectorXcd complex_eigs(const Vector& wr, const Vector& wi) {
  Eigen::VectorXcd ev(wr.size());
  for (Eigen::Index i = 0; i < wr.size(); ++i) ev(i) = {wr(i), wi(i)};
  return ev;
}

}  // namespace

RealSchur real_schur(const Matrix& M) {
  if (M.rows() != M.cols()) throw DimensionError("real_schur: matrix must be square");
  SchurOutput s = run_dgees(M, nullptr);
  return {std::move(s.T), std::move(s.U), complex_eigs(s.wr, s.wi)};
}

LyapunovOperator::LyapunovOperator(const Matrix& M, double axis_tol_rel) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw DimensionError("LyapunovOperator: M must be square and non-empty");
  }
  RealSchur s = real_schur(M);
  T_ = std::move(s.T);
  U_ = std::move(s.U);
  eigenvalues_ = std::move(s.eigenvalues);

  const double tol = axis_tol_rel * M.norm();
  const Eigen::Index n = eigenvalues_.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (std::abs(eigenvalues_(i) + std::conj(eigenvalues_(j))) <= tol) {
        std::ostringstream os;
        os << "Lyapunov operator is singular: eigenvalues " << eigenvalues_(i) << " and "
           << eigenvalues_(j) << " are mirrored across the imaginary axis";
        throw SingularPencil(os.str());
      }
    }
  }
}

Matrix LyapunovOperator::solve_reduced(const Matrix& C, bool transposed) const {
  if (C.rows() != T_.rows() || C.cols() != T_.cols()) {
    throw DimensionError("LyapunovOperator: right-hand side has the wrong shape");
  }
  const auto n = static_cast<lapack_int>(T_.rows());
  Matrix X = -(U_.transpose() * C * U_);
  double scale = 1.0;
  const char trana = transposed ? 'N' : 'T';
  const char tranb = transposed ? 'T' : 'N';
  const lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, trana, tranb, 1, n, n, T_.data(), n,
                                         T_.data(), n, X.data(), n, &scale);
  if (info < 0) throw KypError("dtrsyl: illegal argument " + std::to_string(-info));
  if (scale != 1.0) X /= scale;
  return symmetrized(U_ * X * U_.transpose());
}

Matrix LyapunovOperator::solve(const Matrix& C) const { return solve_reduced(C, false); }

Matrix LyapunovOperator::solve_transposed(const Matrix& C) const {
  return solve_reduced(C, true);
}

Matrix solve_lyapunov(const Matrix& M, const Matrix& C, double axis_tol_rel) {
  return LyapunovOperator(M, axis_tol_rel).solve(C);
}

const char* to_string(RiccatiMode mode) {
  return mode == RiccatiMode::stabilizing ? "stabilizing" : "antistabilizing";
}

namespace {

Eigen::LLT<Matrix> negated_cholesky(const Matrix& R) {
  Eigen::LLT<Matrix> llt(-symmetrized(R));
  if (llt.info() != Eigen::Success) {
    throw NotInDomain("R(lambda) is not negative definite");
  }
  return llt;
}

}  // namespace

Matrix riccati_gain(const Matrix& B, const Matrix& S, const Matrix& R, const Matrix& P) {
  const Eigen::LLT<Matrix> llt = negated_cholesky(R);
  const Matrix G = (P * B + S).transpose();
  return -llt.solve(G);
}

Matrix riccati_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& S,
                        const Matrix& R, const Matrix& P) {
  const Eigen::LLT<Matrix> llt = negated_cholesky(R);
  const Matrix G = P * B + S;
  // −G R⁻¹ Gᵀ = G (−R)⁻¹ Gᵀ
  const Matrix W = llt.matrixL().solve(G.transpose());
  return A.transpose() * P + P * A + Q + W.transpose() * W;
}

double riccati_residual_scale(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                              const Matrix& P) {
  const Matrix Rinv = symmetrized(R).inverse();
  return (1.0 + P.norm()) * (A.norm() + Q.norm() + Rinv.norm() * B.squaredNorm());
}

RiccatiSolution solve_riccati(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& S,
                              const Matrix& R, RiccatiMode mode, const RiccatiOptions& opts) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || S.rows() != n ||
      S.cols() != m || R.rows() != m || R.cols() != m) {
    throw DimensionError("solve_riccati: inconsistent dimensions");
  }
  const Eigen::LLT<Matrix> llt = negated_cholesky(R);

  // R⁻¹Bᵀ and R⁻¹Sᵀ through the factor of −R.
  const Matrix RinvBt = -llt.solve(B.transpose());
  const Matrix RinvSt = -llt.solve(S.transpose());
  const Matrix Ahat = A - B * RinvSt;
  const Matrix G = symmetrized(B * RinvBt);
  const Matrix Qhat = symmetrized(Q - S * RinvSt);

  Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Ahat;
  H.topRightCorner(n, n) = -G;
  H.bottomLeftCorner(n, n) = -Qhat;
  H.bottomRightCorner(n, n) = -Ahat.transpose();

  SchurOutput schur =
      run_dgees(H, mode == RiccatiMode::stabilizing ? &select_left : &select_right);

  const double axis_tol = opts.axis_tol_rel * H.norm();
  for (Eigen::Index i = 0; i < schur.wr.size(); ++i) {
    if (std::abs(schur.wr(i)) <= axis_tol) {
      std::ostringstream os;
      os << "Hamiltonian eigenvalue " << std::complex<double>(schur.wr(i), schur.wi(i))
         << " lies on the imaginary axis (band " << axis_tol << ")";
      throw NotInDomain(os.str());
    }
  }
  if (schur.sdim != n) {
    std::ostringstream os;
    os << "Hamiltonian splits " << schur.sdim << " / " << 2 * n - schur.sdim
       << " instead of n / n";
    throw NotInDomain(os.str());
  }

  const Matrix X1 = schur.U.topLeftCorner(n, n);
  const Matrix X2 = schur.U.bottomLeftCorner(n, n);
  const Eigen::PartialPivLU<Matrix> lu(X1.transpose());
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || 1.0 / rcond > opts.x1_cond_max) {
    throw IllConditioned("invariant subspace basis X1 is ill-conditioned (rcond " +
                         std::to_string(rcond) + ")");
  }

  RiccatiSolution sol;
  sol.mode = mode;
  sol.P = symmetrized(lu.solve(X2.transpose()).transpose());
  sol.closed_loop_eigs = complex_eigs(schur.wr.head(n), schur.wi.head(n));

  Matrix F = riccati_residual(A, B, Q, S, R, sol.P);
  double scale = riccati_residual_scale(A, B, Q, R, sol.P);
  if (F.norm() > opts.residual_tol * scale && opts.refine) {
    const Matrix K = -llt.solve((sol.P * B + S).transpose());
    const Matrix correction = LyapunovOperator(A - B * K, opts.axis_tol_rel).solve(F);
    sol.P = symmetrized(sol.P + correction);
    sol.refined = true;
    F = riccati_residual(A, B, Q, S, R, sol.P);
    scale = riccati_residual_scale(A, B, Q, R, sol.P);
  }
  sol.residual_norm = F.norm();
  if (sol.residual_norm > opts.residual_tol * scale) {
    throw IllConditioned("Riccati residual " + std::to_string(sol.residual_norm) +
                         " exceeds tolerance");
  }
  sol.K = -llt.solve((sol.P * B + S).transpose());
  return sol;
}

}  // namespace kyp
