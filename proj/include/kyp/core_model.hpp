#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kyp/errors.hpp"

namespace kyp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Affine matrix-valued map λ ↦ H_0 + Σ_i λ_i H_i.
///
/// The constructor checks that every coefficient shares the dimensions of the
/// base. Symmetry is a declared property; whether the stored data honors it is
/// reported by validate_problem rather than enforced here, so that malformed
/// input files can still be loaded and diagnosed.
class AffineMatrixFamily {
 public:
  AffineMatrixFamily() = default;
  AffineMatrixFamily(Matrix base, std::vector<Matrix> coeffs, bool symmetric);

  /// Family with p zero coefficients.
  static AffineMatrixFamily constant(Matrix base, int p, bool symmetric);

  int rows() const { return static_cast<int>(base_.rows()); }
  int cols() const { return static_cast<int>(base_.cols()); }
  int size() const { return static_cast<int>(coeffs_.size()); }
  bool symmetric() const { return symmetric_; }

  const Matrix& base() const { return base_; }
  const Matrix& coeff(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }
  const std::vector<Matrix>& coeffs() const { return coeffs_; }

  /// H_0 + Σ λ_i H_i; symmetric families are returned as (H + Hᵀ)/2.
  Matrix evaluate(const Vector& lambda) const;

 private:
  Matrix base_;
  std::vector<Matrix> coeffs_;
  bool symmetric_ = false;
};

Matrix evaluate_family(const AffineMatrixFamily& fam, const Vector& lambda);

/// Standard-form KYP semidefinite program
///
///   minimize  cᵀλ − tr(ΣP)
///   s.t.      [A B; I 0]ᵀ [0 P; P 0] [A B; I 0] + [Q(λ) S(λ); S(λ)ᵀ R(λ)] ≺ 0,
///             N(λ) ≻ 0,  P ≻ 0.
struct KypProblem {
  Matrix A;
  Matrix B;
  Vector c;
  Matrix Sigma;
  AffineMatrixFamily Q;
  AffineMatrixFamily S;
  AffineMatrixFamily R;
  AffineMatrixFamily N;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(c.size()); }
  int r() const { return N.rows(); }
};

enum class Severity { info, warning, error };

struct Finding {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const;
  bool has(const std::string& code) const;
};

struct ValidationOptions {
  double sym_tol = 1e-10;
  double psd_tol = 1e-10;  // relative to 1 + ‖Σ‖
  double rank_tol = 1e-10;
};

ValidationReport validate_problem(const KypProblem& prob, const ValidationOptions& opts = {});

/// Controllability by orthogonal staircase reduction. A step's rank counts
/// singular values above rank_tol·n·(‖A‖ + ‖B‖).
bool is_controllable(const Matrix& A, const Matrix& B, double rank_tol = 1e-10);

/// Entrywise |H − Hᵀ| ≤ tol·(1 + |H|).
bool is_symmetric(const Matrix& H, double tol);

inline Matrix symmetrized(const Matrix& H) { return 0.5 * (H + H.transpose()); }

const char* to_string(Severity s);

}  // namespace kyp
