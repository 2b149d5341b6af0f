#pragma once

#include <Eigen/Dense>

#include "kyp/core_model.hpp"

namespace kyp {

/// Real Schur factorization M = U T Uᵀ (T quasi upper triangular).
struct RealSchur {
  Matrix T;
  Matrix U;
  Eigen::VectorXcd eigenvalues;
};

RealSchur real_schur(const Matrix& M);

/// Schur-factored Lyapunov operator X ↦ MᵀX + XM.
///
/// The factorization is computed once; each solve costs one
/// Bartels–Stewart back substitution plus two orthogonal transformations.
/// Instances are immutable and safe to share between threads.
class LyapunovOperator {
 public:
  /// Throws SingularPencil when μ_i + conj(μ_j) lies within
  /// axis_tol_rel·‖M‖_F of zero for some eigenvalue pair of M.
  explicit LyapunovOperator(const Matrix& M, double axis_tol_rel = 1e-8);

  int size() const { return static_cast<int>(T_.rows()); }

  /// Solves MᵀX + XM + C = 0.
  Matrix solve(const Matrix& C) const;

  /// Solves MX + XMᵀ + C = 0.
  Matrix solve_transposed(const Matrix& C) const;

  const Eigen::VectorXcd& eigenvalues() const { return eigenvalues_; }

 private:
  Matrix solve_reduced(const Matrix& C, bool transposed) const;

  Matrix T_;
  Matrix U_;
  Eigen::VectorXcd eigenvalues_;
};

/// Solves MᵀX + XM + C = 0 by the Bartels–Stewart method.
Matrix solve_lyapunov(const Matrix& M, const Matrix& C, double axis_tol_rel = 1e-8);

enum class RiccatiMode { stabilizing, antistabilizing };

const char* to_string(RiccatiMode mode);

struct RiccatiOptions {
  double axis_tol_rel = 1e-8;   // imaginary-axis band, relative to ‖H‖_F
  double x1_cond_max = 1e12;    // bound on cond(X1) of the invariant subspace basis
  double residual_tol = 1e-8;   // relative residual tolerance, see riccati_residual_scale
  bool refine = true;           // one Newton correction when the residual test fails
};

struct RiccatiSolution {
  Matrix P;
  Matrix K;  // R⁻¹(PB + S)ᵀ
  Eigen::VectorXcd closed_loop_eigs;
  double residual_norm = 0.0;
  RiccatiMode mode = RiccatiMode::stabilizing;
  bool refined = false;
};

/// Solves F(P) = AᵀP + PA + Q − (PB + S)R⁻¹(PB + S)ᵀ = 0 for R ≺ 0 through an
/// ordered real Schur form of the Hamiltonian
///
///   [ A − BR⁻¹Sᵀ          −BR⁻¹Bᵀ        ]
///   [ −(Q − SR⁻¹Sᵀ)   −(A − BR⁻¹Sᵀ)ᵀ ].
///
/// The leading invariant subspace [X1; X2] collects the eigenvalues in the
/// open left (stabilizing) or right (antistabilizing) half plane and
/// P = X2 X1⁻¹.
///
/// Throws NotInDomain when R is not negative definite or a Hamiltonian
/// eigenvalue sits within the axis band, IllConditioned when X1 cannot be
/// inverted reliably or the residual test fails.
RiccatiSolution solve_riccati(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& S,
                              const Matrix& R, RiccatiMode mode, const RiccatiOptions& opts = {});

Matrix riccati_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& S,
                        const Matrix& R, const Matrix& P);

/// (1 + ‖P‖)(‖A‖ + ‖Q‖ + ‖R⁻¹‖‖B‖²), Frobenius norms.
double riccati_residual_scale(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                              const Matrix& P);

/// R⁻¹(PB + S)ᵀ.
Matrix riccati_gain(const Matrix& B, const Matrix& S, const Matrix& R, const Matrix& P);

}  // namespace kyp
