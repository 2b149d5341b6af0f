#include "kyp/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kyp {

AffineMatrixFamily::AffineMatrixFamily(Matrix base, std::vector<Matrix> coeffs, bool symmetric)
    : base_(std::move(base)), coeffs_(std::move(coeffs)), symmetric_(symmetric) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i].rows() != base_.rows() || coeffs_[i].cols() != base_.cols()) {
      std::ostringstream os;
      os << "affine family: coefficient " << i + 1 << " is " << coeffs_[i].rows() << "x"
         << coeffs_[i].cols() << ", base is " << base_.rows() << "x" << base_.cols();
      throw DimensionError(os.str());
    }
  }
}

AffineMatrixFamily AffineMatrixFamily::constant(Matrix base, int p, bool symmetric) {
  std::vector<Matrix> coeffs(static_cast<std::size_t>(p), Matrix::Zero(base.rows(), base.cols()));
  return AffineMatrixFamily(std::move(base), std::move(coeffs), symmetric);
}

Matrix AffineMatrixFamily::evaluate(const Vector& lambda) const {
  if (lambda.size() != size()) {
    std::ostringstream os;
    os << "affine family: lambda has length " << lambda.size() << ", family has " << size()
       << " coefficients";
    throw DimensionError(os.str());
  }
  Matrix H = base_;
  for (int i = 0; i < size(); ++i) {
    if (lambda(i) != 0.0) H.noalias() += lambda(i) * coeffs_[static_cast<std::size_t>(i)];
  }
  if (symmetric_) return symmetrized(H);
  return H;
}

Matrix evaluate_family(const AffineMatrixFamily& fam, const Vector& lambda) {
  return fam.evaluate(lambda);
}

bool ValidationReport::ok() const {
  return std::none_of(findings.begin(), findings.end(),
                      [](const Finding& f) { return f.severity == Severity::error; });
}

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Finding& f) { return f.code == code; });
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::info:
      return "info";
    case Severity::warning:
      return "warning";
    case Severity::error:
      return "error";
  }
  return "error";
}

bool is_symmetric(const Matrix& H, double tol) {
  if (H.rows() != H.cols()) return false;
  for (Eigen::Index j = 0; j < H.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < H.rows(); ++i) {
      const double scale = 1.0 + std::max(std::abs(H(i, j)), std::abs(H(j, i)));
      if (std::abs(H(i, j) - H(j, i)) > tol * scale) return false;
    }
  }
  return true;
}

bool is_controllable(const Matrix& A, const Matrix& B, double rank_tol) {
  // Orthogonal staircase reduction: split off range(B), continue with the
  // compressed pair on the orthogonal complement.
  const Eigen::Index n = A.rows();
  if (n == 0) return true;
  if (B.cols() == 0) return false;
  const double threshold =
      rank_tol * static_cast<double>(n) * (A.norm() + B.norm() + std::numeric_limits<double>::min());
  Matrix a = A;
  Matrix b = B;
  while (a.rows() > 0) {
    const Eigen::Index k = a.rows();
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU);
    const Vector& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > threshold) ++r;
    if (r == 0) return false;
    if (r == k) return true;
    const Matrix U = svd.matrixU();
    const Matrix Uc = U.rightCols(k - r);
    b = Uc.transpose() * a * U.leftCols(r);
    a = Uc.transpose() * a * Uc;
  }
  return true;
}

namespace {

void check_family(const char* name, const AffineMatrixFamily& fam, int rows, int cols, int p,
                  bool must_be_symmetric, double sym_tol, std::vector<Finding>& out) {
  std::ostringstream os;
  if (fam.rows() != rows || fam.cols() != cols) {
    os << "family " << name << " is " << fam.rows() << "x" << fam.cols() << ", expected " << rows
       << "x" << cols;
    out.push_back({Severity::error, "dimension", os.str()});
    return;
  }
  if (fam.size() != p) {
    os << "family " << name << " has " << fam.size() << " coefficients, expected p = " << p;
    out.push_back({Severity::error, "coeff_count", os.str()});
  }
  if (!must_be_symmetric) return;
  if (!fam.symmetric()) {
    os << "family " << name << " must be flagged symmetric";
    out.push_back({Severity::error, "not_symmetric", os.str()});
    return;
  }
  if (!is_symmetric(fam.base(), sym_tol)) {
    out.push_back({Severity::error, "not_symmetric",
                   std::string("family ") + name + " base (index 0) is not symmetric"});
  }
  for (int i = 0; i < fam.size(); ++i) {
    if (!is_symmetric(fam.coeff(i), sym_tol)) {
      out.push_back({Severity::error, "not_symmetric",
                     std::string("family ") + name + " coefficient " + std::to_string(i + 1) +
                         " is not symmetric"});
    }
  }
}

}  // namespace

ValidationReport validate_problem(const KypProblem& prob, const ValidationOptions& opts) {
  ValidationReport rep;
  auto& out = rep.findings;
  const int n = static_cast<int>(prob.A.rows());
  const int m = static_cast<int>(prob.B.cols());
  const int p = prob.p();

  if (prob.A.rows() != prob.A.cols() || n == 0) {
    out.push_back({Severity::error, "dimension", "A must be square and non-empty"});
    return rep;
  }
  if (prob.B.rows() != n || m == 0) {
    out.push_back({Severity::error, "dimension", "B must have n rows and at least one column"});
    return rep;
  }
  if (prob.Sigma.rows() != n || prob.Sigma.cols() != n) {
    out.push_back({Severity::error, "dimension", "Sigma must be n x n"});
  } else if (!is_symmetric(prob.Sigma, opts.sym_tol)) {
    out.push_back({Severity::error, "not_symmetric", "Sigma is not symmetric"});
  } else {
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(prob.Sigma)).eigenvalues();
    const double tol = opts.psd_tol * (1.0 + prob.Sigma.norm());
    if (ev.minCoeff() < -tol) {
      out.push_back({Severity::error, "sigma_not_psd", "Sigma not PSD"});
    }
  }

  check_family("Q", prob.Q, n, n, p, true, opts.sym_tol, out);
  check_family("S", prob.S, n, m, p, false, opts.sym_tol, out);
  check_family("R", prob.R, m, m, p, true, opts.sym_tol, out);
  if (prob.N.rows() == 0) {
    out.push_back({Severity::error, "dimension", "family N must be non-empty"});
  } else {
    check_family("N", prob.N, prob.N.rows(), prob.N.rows(), p, true, opts.sym_tol, out);
  }

  if (!is_controllable(prob.A, prob.B, opts.rank_tol)) {
    out.push_back({Severity::error, "uncontrollable", "uncontrollable: (A, B) fails the rank test"});
  }
  return rep;
}

}  // namespace kyp
