#include "kyp/synthesis.hpp"

#include <sstream>

namespace kyp {

void PlantModel::check() const {
  const auto n = A.rows();
  std::ostringstream os;
  if (A.cols() != n) os << "A is not square; ";
  if (B1.rows() != n) os << "B1 needs n rows; ";
  if (B2.rows() != n) os << "B2 needs n rows; ";
  if (C.cols() != n) os << "C needs n columns; ";
  if (D1.rows() != C.rows() || D1.cols() != B1.cols()) os << "D1 must be l x m; ";
  if (D2.rows() != C.rows() || D2.cols() != B2.cols()) os << "D2 must be l x d; ";
  if (!os.str().empty()) throw DimensionError("plant: " + os.str());
}

SynthesisSpec build_actuator_uncertainty(const Matrix& Acal, const Matrix& B1, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const auto n = Acal.rows();
  const auto m = B1.cols();
  if (Acal.cols() != n || B1.rows() != n) throw DimensionError("actuator model: bad shapes");

  SynthesisSpec spec;
  spec.plant.A = Acal;
  spec.plant.B1 = B1;
  spec.plant.B2 = B1;
  spec.plant.C = Matrix::Zero(m, n);
  spec.plant.D1 = Matrix::Identity(m, m);
  spec.plant.D2 = Matrix::Zero(m, m);
  spec.Qcal = Matrix::Identity(n, n);
  spec.Rcal = Matrix::Identity(m, m);

  const double g2 = gamma * gamma;
  std::vector<Matrix> mcoeffs;
  std::vector<Matrix> ncoeffs;
  for (Eigen::Index i = 0; i < m; ++i) {
    Matrix Mi = Matrix::Zero(2 * m, 2 * m);
    Mi(i, i) = g2;
    Mi(m + i, m + i) = -1.0;
    mcoeffs.push_back(std::move(Mi));
    Matrix Ni = Matrix::Zero(m, m);
    Ni(i, i) = 1.0;
    ncoeffs.push_back(std::move(Ni));
  }
  spec.M = AffineMatrixFamily(Matrix::Zero(2 * m, 2 * m), std::move(mcoeffs), true);
  spec.N = AffineMatrixFamily(Matrix::Zero(m, m), std::move(ncoeffs), true);
  return spec;
}

namespace {

double min_eig(const Matrix& X) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(X), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

void check_spec(const SynthesisSpec& spec) {
  spec.plant.check();
  const int n = spec.plant.n();
  const int m = spec.plant.m();
  const int md = spec.plant.l() + spec.plant.d();
  if (spec.Qcal.rows() != n || spec.Qcal.cols() != n) throw DimensionError("Qcal must be n x n");
  if (spec.Rcal.rows() != m || spec.Rcal.cols() != m) throw DimensionError("Rcal must be m x m");
  if (spec.M.rows() != md || spec.M.cols() != md) {
    throw DimensionError("multiplier M must be (l + d) x (l + d)");
  }
  if (spec.N.size() != spec.M.size()) {
    throw DimensionError("multiplier families M and N need the same parameter count");
  }
}

}  // namespace

MultiplierCheck check_multiplier_conditions(const SynthesisSpec& spec, const Vector& lambda) {
  check_spec(spec);
  const int l = spec.plant.l();
  const int d = spec.plant.d();
  const Matrix M = spec.M.evaluate(lambda);
  Matrix T(l + d, l);
  T.topRows(l) = Matrix::Identity(l, l);
  T.bottomRows(d) = spec.plant.D2.transpose();
  MultiplierCheck out;
  out.outer_margin = l > 0 ? min_eig(T.transpose() * M * T) : INFINITY;
  out.m22_margin = d > 0 ? min_eig(-M.bottomRightCorner(d, d)) : INFINITY;
  return out;
}

Matrix elimination_matrix(const PlantModel& plant) {
  plant.check();
  const int n = plant.n();
  const int m = plant.m();
  const int l = plant.l();
  const int d = plant.d();
  Matrix L = Matrix::Zero(n + m + l + d, 2 * n + l);
  L.block(0, n, n, n) = -Matrix::Identity(n, n);
  L.block(n, 0, m, n) = plant.B1.transpose();
  L.block(n, 2 * n, m, l) = plant.D1.transpose();
  L.block(n + m, 2 * n, l, l) = -Matrix::Identity(l, l);
  L.block(n + m + l, 0, d, n) = plant.B2.transpose();
  L.block(n + m + l, 2 * n, d, l) = plant.D2.transpose();
  return L;
}

Matrix elimination_weight(const SynthesisSpec& spec, const Vector& lambda) {
  check_spec(spec);
  const int n = spec.plant.n();
  const int m = spec.plant.m();
  const int md = spec.M.rows();
  Matrix D = Matrix::Zero(n + m + md, n + m + md);
  D.topLeftCorner(n, n) = symmetrized(spec.Qcal.inverse());
  D.block(n, n, m, m) = symmetrized(spec.Rcal.inverse());
  D.bottomRightCorner(md, md) = spec.M.evaluate(lambda);
  return D;
}

KypProblem assemble_kyp_sdp(const SynthesisSpec& spec) {
  check_spec(spec);
  const PlantModel& pl = spec.plant;
  const int n = pl.n();
  const int l = pl.l();
  const int d = pl.d();
  const int p = spec.p();

  Eigen::LLT<Matrix> qllt(symmetrized(spec.Qcal));
  Eigen::LLT<Matrix> rllt(symmetrized(spec.Rcal));
  if (qllt.info() != Eigen::Success) throw std::invalid_argument("Qcal is not positive definite");
  if (rllt.info() != Eigen::Success) throw std::invalid_argument("Rcal is not positive definite");
  const Matrix Qinv = symmetrized(qllt.solve(Matrix::Identity(n, n)));
  const Matrix Rinv = symmetrized(rllt.solve(Matrix::Identity(pl.m(), pl.m())));

  // Blocks of Lᵀ D L over the column split (x: n, y: n, z: l):
  //   xx = ℬ₁ℛ⁻¹ℬ₁ᵀ + ℬ₂M22ℬ₂ᵀ
  //   xz = ℬ₁ℛ⁻¹𝒟₁ᵀ − ℬ₂M21 + ℬ₂M22𝒟₂ᵀ
  //   yy = 𝒬⁻¹,  xy = yz = 0
  //   zz = 𝒟₁ℛ⁻¹𝒟₁ᵀ + M11 − M12𝒟₂ᵀ − 𝒟₂M21 + 𝒟₂M22𝒟₂ᵀ
  // The ℛ⁻¹ and 𝒬⁻¹ parts go into the base only.
  struct Blocks {
    Matrix Q, S, R;
  };
  auto expand = [&](const Matrix& M, bool with_weights) {
    const Matrix M11 = M.topLeftCorner(l, l);
    const Matrix M12 = M.topRightCorner(l, d);
    const Matrix M21 = M.bottomLeftCorner(d, l);
    const Matrix M22 = M.bottomRightCorner(d, d);
    Matrix xx = pl.B2 * M22 * pl.B2.transpose();
    Matrix xz = -pl.B2 * M21 + pl.B2 * M22 * pl.D2.transpose();
    Matrix zz = M11 - M12 * pl.D2.transpose() - pl.D2 * M21 + pl.D2 * M22 * pl.D2.transpose();
    Matrix yy = Matrix::Zero(n, n);
    if (with_weights) {
      xx += pl.B1 * Rinv * pl.B1.transpose();
      xz += pl.B1 * Rinv * pl.D1.transpose();
      zz += pl.D1 * Rinv * pl.D1.transpose();
      yy = Qinv;
    }
    Blocks b;
    b.Q = -symmetrized(xx);
    b.S = Matrix::Zero(n, n + l);
    b.S.rightCols(l) = -xz;
    b.R = Matrix::Zero(n + l, n + l);
    b.R.topLeftCorner(n, n) = -yy;
    b.R.bottomRightCorner(l, l) = -symmetrized(zz);
    return b;
  };

  const Blocks base = expand(spec.M.base(), true);
  std::vector<Matrix> qc, sc, rc;
  for (int i = 0; i < p; ++i) {
    Blocks bi = expand(spec.M.coeff(i), false);
    qc.push_back(std::move(bi.Q));
    sc.push_back(std::move(bi.S));
    rc.push_back(std::move(bi.R));
  }

  KypProblem prob;
  prob.A = pl.A.transpose();
  prob.B = Matrix::Zero(n, n + l);
  prob.B.leftCols(n) = Matrix::Identity(n, n);
  prob.B.rightCols(l) = pl.C.transpose();
  prob.c = Vector::Zero(p);
  prob.Sigma = Matrix::Identity(n, n);
  prob.Q = AffineMatrixFamily(base.Q, std::move(qc), true);
  prob.S = AffineMatrixFamily(base.S, std::move(sc), false);
  prob.R = AffineMatrixFamily(base.R, std::move(rc), true);
  prob.N = spec.N;
  return prob;
}

ChainPlant generate_mass_spring_chain(int k) {
  if (k < 1) throw std::invalid_argument("mass-spring chain needs at least one mass");
  Matrix K = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    // spring to the left neighbour (or wall) plus spring to the right neighbour
    K(i, i) = (i + 1 < k) ? 2.0 : 1.0;
    if (i > 0) K(i, i - 1) = -1.0;
    if (i + 1 < k) K(i, i + 1) = -1.0;
  }
  ChainPlant plant;
  plant.A = Matrix::Zero(2 * k, 2 * k);
  plant.A.topRightCorner(k, k) = Matrix::Identity(k, k);
  plant.A.bottomLeftCorner(k, k) = -K;
  plant.A.bottomRightCorner(k, k) = -0.1 * Matrix::Identity(k, k);
  plant.B1 = Matrix::Zero(2 * k, 1);
  plant.B1(2 * k - 1, 0) = 1.0;
  return plant;
}

}  // namespace kyp
