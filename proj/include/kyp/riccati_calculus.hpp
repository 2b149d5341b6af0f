#pragma once

#include <memory>
#include <vector>

#include "kyp/core_model.hpp"
#include "kyp/execution.hpp"
#include "kyp/matrix_equations.hpp"

namespace kyp {

enum class PairStrategy {
  two_solves,         // two ordered-Schur Riccati solves
  lyapunov_shortcut,  // P_− by ordered Schur, then Δ from one Lyapunov solve
};

const char* to_string(PairStrategy s);

struct PairOptions {
  PairStrategy strategy = PairStrategy::lyapunov_shortcut;
  RiccatiOptions riccati;
  double y_cond_max = 1e12;
  /// Shortcut only: when ‖P_−‖ exceeds this multiple of ‖P_− + Δ‖ the sum has
  /// lost digits to cancellation and P_+ is re-solved directly.
  double cancellation_max = 1e2;
};

struct SolveCounters {
  long riccati = 0;
  long lyapunov = 0;

  SolveCounters& operator+=(const SolveCounters& o) {
    riccati += o.riccati;
    lyapunov += o.lyapunov;
    return *this;
  }
};

/// Both Riccati solutions at one multiplier value.
struct RiccatiPair {
  Vector lambda;
  Matrix P_plus;   // antistabilizing
  Matrix P_minus;  // stabilizing
  Matrix Delta;    // P_plus − P_minus
  Matrix K_plus;
  Matrix K_minus;
  Matrix Q, S, R, N;  // family values at lambda
  /// Schur-factored closed loop A − BK_−, kept when the shortcut built it.
  std::shared_ptr<const LyapunovOperator> loop_minus;
  SolveCounters counters;
};

RiccatiPair compute_pair(const KypProblem& prob, const Vector& lambda,
                         const PairOptions& opts = {});

/// Second Riccati solution from a first one: solves
/// Z(A − BK₁)ᵀ + (A − BK₁)Z = BR⁻¹Bᵀ and returns Y = Z⁻¹, so that P₁ + Y
/// solves the same Riccati equation. With P₁ = P_− the result is Δ.
Matrix delta_via_lyapunov(const Matrix& A, const Matrix& B, const Matrix& S, const Matrix& R,
                          const RiccatiSolution& P1, double y_cond_max = 1e12,
                          double axis_tol_rel = 1e-8);

/// Same, reusing an already factored closed loop A − BK₁.
Matrix delta_via_lyapunov(const LyapunovOperator& closed_loop, const Matrix& B, const Matrix& R,
                          double y_cond_max = 1e12);

/// Upper-triangle storage for a table indexed by unordered pairs (i, j).
class SymmetricTable {
 public:
  SymmetricTable() = default;
  explicit SymmetricTable(int p) : p_(p), data_(static_cast<std::size_t>(p * (p + 1) / 2)) {}

  int dim() const { return p_; }
  int entries() const { return static_cast<int>(data_.size()); }
  static int packed_index(int i, int j, int p);

  Matrix& at(int i, int j) { return data_[static_cast<std::size_t>(packed_index(i, j, p_))]; }
  const Matrix& at(int i, int j) const {
    return data_[static_cast<std::size_t>(packed_index(i, j, p_))];
  }
  Matrix& packed(int k) { return data_[static_cast<std::size_t>(k)]; }
  const Matrix& packed(int k) const { return data_[static_cast<std::size_t>(k)]; }

 private:
  int p_ = 0;
  std::vector<Matrix> data_;
};

struct BranchFirst {
  std::vector<Matrix> dP;
  std::vector<Matrix> dK;
};

struct FirstDerivatives {
  BranchFirst plus;
  BranchFirst minus;
  std::shared_ptr<const LyapunovOperator> loop_plus;
  std::shared_ptr<const LyapunovOperator> loop_minus;
  SolveCounters counters;
};

struct SecondDerivatives {
  SymmetricTable plus;
  SymmetricTable minus;
  SolveCounters counters;
};

struct DerivativeBundle {
  FirstDerivatives first;
  SecondDerivatives second;
  std::vector<Matrix> dDelta;
  SymmetricTable d2Delta;
  SolveCounters counters;

  const std::vector<Matrix>& dP_plus() const { return first.plus.dP; }
  const std::vector<Matrix>& dP_minus() const { return first.minus.dP; }
  const Matrix& d2P_plus(int i, int j) const { return second.plus.at(i, j); }
  const Matrix& d2P_minus(int i, int j) const { return second.minus.at(i, j); }
};

/// ∂P_± by one Lyapunov solve per parameter and branch:
/// (A − BK)ᵀ∂P + ∂P(A − BK) + [I; −K]ᵀ[Q_i S_i; S_iᵀ R_i][I; −K] = 0.
FirstDerivatives first_derivatives(const KypProblem& prob, const RiccatiPair& pair,
                                   Exec exec = Exec::parallel);

/// ∂²P_± for i ≤ j:
/// (A − BK)ᵀX + X(A − BK) − ∂_jKᵀR∂_iK − ∂_iKᵀR∂_jK = 0,
/// with ∂_iK = R⁻¹(Bᵀ∂_iP + S_iᵀ − R_iK).
SecondDerivatives second_derivatives(const KypProblem& prob, const RiccatiPair& pair,
                                     const FirstDerivatives& firsts, Exec exec = Exec::parallel);

DerivativeBundle compute_derivatives(const KypProblem& prob, const RiccatiPair& pair,
                                     Exec exec = Exec::parallel);

}  // namespace kyp
