#pragma once

#include "kyp/core_model.hpp"

namespace kyp {

/// ẋ = 𝒜x + ℬ₁u + ℬ₂w,  z = 𝒞x + 𝒟₁u + 𝒟₂w.
struct PlantModel {
  Matrix A;   // n×n
  Matrix B1;  // n×m
  Matrix B2;  // n×d
  Matrix C;   // l×n
  Matrix D1;  // l×m
  Matrix D2;  // l×d

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B1.cols()); }
  int d() const { return static_cast<int>(B2.cols()); }
  int l() const { return static_cast<int>(C.rows()); }

  /// Throws DimensionError on inconsistent block sizes.
  void check() const;
};

/// Robust LQR synthesis data: plant, stage-cost weights and the multiplier
/// family M(λ) = [M11 M12; M21 M22] acting on (z, w), split l + d.
struct SynthesisSpec {
  PlantModel plant;
  Matrix Qcal;  // n×n, positive definite
  Matrix Rcal;  // m×m, positive definite
  AffineMatrixFamily M;
  AffineMatrixFamily N;

  int p() const { return M.size(); }
};

/// Multiplicative actuator uncertainty: 𝒞 = 0, 𝒟₁ = I, 𝒟₂ = 0, ℬ₂ = ℬ₁,
/// M(λ) = diag(γ²λ_1, …, γ²λ_m, −λ_1, …, −λ_m), N(λ) = diag(λ), 𝒬 = I, ℛ = I.
SynthesisSpec build_actuator_uncertainty(const Matrix& Acal, const Matrix& B1, double gamma);

struct MultiplierCheck {
  double outer_margin = 0.0;  // min eig [I; 𝒟₂ᵀ]ᵀ M(λ) [I; 𝒟₂ᵀ]
  double m22_margin = 0.0;    // −max eig M22(λ)
  bool ok() const { return outer_margin > 0.0 && m22_margin > 0.0; }
};

MultiplierCheck check_multiplier_conditions(const SynthesisSpec& spec, const Vector& lambda);

/// Standard-form instance of the eliminated synthesis LMI:
/// A = 𝒜ᵀ, B = [I_n, 𝒞ᵀ], [Q S; Sᵀ R](λ) = −Lᵀ D(λ) L, c = 0, Σ = I_n, where
///
///   L = [ 0    −I   0  ]        D(λ) = blockdiag(𝒬⁻¹, ℛ⁻¹, M(λ)).
///       [ ℬ₁ᵀ   0   𝒟₁ᵀ]
///       [ 0     0   −I  ]
///       [ ℬ₂ᵀ   0   𝒟₂ᵀ]
///
/// The product is expanded blockwise so that each coefficient Q_i, S_i, R_i is
/// built from M_i alone.
KypProblem assemble_kyp_sdp(const SynthesisSpec& spec);

/// Dense L of the elimination (rows n + m + l + d, columns n + n + l).
Matrix elimination_matrix(const PlantModel& plant);

/// Dense D(λ).
Matrix elimination_weight(const SynthesisSpec& spec, const Vector& lambda);

/// k unit masses in a chain, unit springs (wall – m₁ – … – m_k), damping 0.1
/// on every mass, force on the last mass. State ordering: positions, then
/// velocities.
struct ChainPlant {
  Matrix A;
  Matrix B1;
};

ChainPlant generate_mass_spring_chain(int k);

}  // namespace kyp
