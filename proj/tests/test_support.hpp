#pragma once

#include <random>

#include "kyp/barrier_ipm.hpp"
#include "kyp/core_model.hpp"

namespace kyp::testing {

inline Matrix randn(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = dist(rng);
  return M;
}

inline Matrix random_spd(std::mt19937_64& rng, int n, double floor) {
  const Matrix G = randn(rng, n, n);
  return G * G.transpose() / n + floor * Matrix::Identity(n, n);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double min_eig(const Matrix& X) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(X), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

inline double max_eig(const Matrix& X) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(X), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

/// Instance with a planted strictly feasible pair (lambda, P): the multiplier
/// base is chosen so that the KYP matrix at (lambda, P) equals −W for a random
/// W ≻ 0. N(λ) = diag(λ_i − lo_i, hi_i − λ_i) keeps the feasible set bounded.
struct RandomInstance {
  KypProblem prob;
  Vector lambda;
  Matrix P;
  Vector lo;
  Vector hi;
};

inline RandomInstance random_feasible_instance(std::mt19937_64& rng, int n, int m, int p) {
  for (;;) {
    RandomInstance out;
    KypProblem& prob = out.prob;
    prob.A = randn(rng, n, n, 1.0 / std::sqrt(static_cast<double>(n)));
    prob.B = randn(rng, n, m);
    out.P = random_spd(rng, n, 0.5);
    out.lambda.resize(p);
    out.lo.resize(p);
    out.hi.resize(p);
    for (int i = 0; i < p; ++i) {
      out.lambda(i) = uniform(rng, 0.5, 1.5);
      out.lo(i) = out.lambda(i) - uniform(rng, 0.3, 1.0);
      out.hi(i) = out.lambda(i) + uniform(rng, 0.3, 1.0);
    }

    std::vector<Matrix> Qc, Sc, Rc;
    for (int i = 0; i < p; ++i) {
      Qc.push_back(symmetrized(randn(rng, n, n, 0.3)));
      Sc.push_back(randn(rng, n, m, 0.3));
      Rc.push_back(symmetrized(randn(rng, m, m, 0.1)));
    }
    const Matrix W = random_spd(rng, n + m, 0.2);
    Matrix Q0 = -(prob.A.transpose() * out.P + out.P * prob.A) - W.topLeftCorner(n, n);
    Matrix S0 = -(out.P * prob.B) - W.topRightCorner(n, m);
    Matrix R0 = -W.bottomRightCorner(m, m);
    for (int i = 0; i < p; ++i) {
      const auto k = static_cast<std::size_t>(i);
      Q0 -= out.lambda(i) * Qc[k];
      S0 -= out.lambda(i) * Sc[k];
      R0 -= out.lambda(i) * Rc[k];
    }
    prob.Q = AffineMatrixFamily(symmetrized(Q0), Qc, true);
    prob.S = AffineMatrixFamily(S0, Sc, false);
    prob.R = AffineMatrixFamily(symmetrized(R0), Rc, true);

    Matrix N0 = Matrix::Zero(2 * p, 2 * p);
    std::vector<Matrix> Nc;
    for (int i = 0; i < p; ++i) {
      N0(i, i) = -out.lo(i);
      N0(p + i, p + i) = out.hi(i);
      Matrix Ni = Matrix::Zero(2 * p, 2 * p);
      Ni(i, i) = 1.0;
      Ni(p + i, p + i) = -1.0;
      Nc.push_back(Ni);
    }
    prob.N = AffineMatrixFamily(N0, Nc, true);
    prob.c = randn(rng, p, 1, 0.5);
    prob.Sigma = random_spd(rng, n, 0.5);

    if (feasibility_margins(prob, out.lambda).strictly_feasible()) return out;
  }
}

/// S1: A = 0, B = 1, Q(λ) = −λ, S = 0, R = −1, N(λ) = λ, c = 1, Σ = 1.
inline KypProblem scalar_s1(double c = 1.0, double sigma = 1.0) {
  KypProblem prob;
  prob.A = Matrix::Zero(1, 1);
  prob.B = Matrix::Ones(1, 1);
  prob.c = Vector::Constant(1, c);
  prob.Sigma = Matrix::Constant(1, 1, sigma);
  prob.Q = AffineMatrixFamily(Matrix::Zero(1, 1), {Matrix::Constant(1, 1, -1.0)}, true);
  prob.S = AffineMatrixFamily::constant(Matrix::Zero(1, 1), 1, false);
  prob.R = AffineMatrixFamily::constant(Matrix::Constant(1, 1, -1.0), 1, true);
  prob.N = AffineMatrixFamily(Matrix::Zero(1, 1), {Matrix::Ones(1, 1)}, true);
  return prob;
}

/// Two decoupled copies of the scalar Riccati example: A = 0, B = I, Q = −λI,
/// S = 0, R = −I.
inline KypProblem decoupled_pair() {
  KypProblem prob;
  const Matrix I = Matrix::Identity(2, 2);
  prob.A = Matrix::Zero(2, 2);
  prob.B = I;
  prob.c = Vector::Ones(1);
  prob.Sigma = I;
  prob.Q = AffineMatrixFamily(Matrix::Zero(2, 2), {-I}, true);
  prob.S = AffineMatrixFamily::constant(Matrix::Zero(2, 2), 1, false);
  prob.R = AffineMatrixFamily::constant(-I, 1, true);
  prob.N = AffineMatrixFamily(Matrix::Zero(1, 1), {Matrix::Ones(1, 1)}, true);
  return prob;
}

inline Vector vec1(double x) { return Vector::Constant(1, x); }

}  // namespace kyp::testing
