#include <gtest/gtest.h>

#include "kyp/core_model.hpp"
#include "test_support.hpp"

using namespace kyp;
using namespace kyp::testing;

TEST(EvaluateFamily, ZeroLambdaReturnsBase) {
  AffineMatrixFamily f(Matrix::Ones(1, 1), {Matrix::Constant(1, 1, 2.0)}, true);
  EXPECT_EQ(evaluate_family(f, vec1(0.0))(0, 0), 1.0);
}

TEST(EvaluateFamily, SingleTermLinearity) {
  AffineMatrixFamily f(Matrix::Zero(1, 1), {Matrix::Constant(1, 1, -1.0)}, true);
  EXPECT_EQ(evaluate_family(f, vec1(3.0))(0, 0), -3.0);
}

TEST(EvaluateFamily, HandSummation) {
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  AffineMatrixFamily f(Matrix::Identity(2, 2), {Matrix::Identity(2, 2), swap}, true);
  Vector lam(2);
  lam << 1, 2;
  EXPECT_EQ(f.evaluate(lam), Matrix::Constant(2, 2, 2.0));
}

TEST(EvaluateFamily, SymmetricFamiliesAreExactlySymmetrized) {
  Matrix H(2, 2);
  H << 1, 2, 2.5, 3;
  AffineMatrixFamily f(H, {H}, true);
  const Matrix X = f.evaluate(vec1(0.7));
  EXPECT_EQ(X(0, 1), X(1, 0));
  AffineMatrixFamily g(H, {H}, false);
  EXPECT_NE(g.evaluate(vec1(0.7))(0, 1), g.evaluate(vec1(0.7))(1, 0));
}

TEST(EvaluateFamily, DimensionMismatchThrows) {
  EXPECT_THROW(AffineMatrixFamily(Matrix::Zero(2, 2), {Matrix::Zero(2, 3)}, false), DimensionError);
  AffineMatrixFamily f(Matrix::Zero(2, 2), {Matrix::Zero(2, 2)}, true);
  EXPECT_THROW(f.evaluate(Vector::Zero(2)), DimensionError);
}

TEST(EvaluateFamily, AffineProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + trial % 4;
    std::vector<Matrix> coeffs;
    for (int i = 0; i < p; ++i) coeffs.push_back(randn(rng, 3, 4));
    AffineMatrixFamily f(randn(rng, 3, 4), coeffs, false);
    const Vector l1 = randn(rng, p, 1);
    const Vector l2 = randn(rng, p, 1);
    const Matrix lhs = f.evaluate(l1 + l2) - f.evaluate(0.0 * l1);
    const Matrix rhs = (f.evaluate(l1) - f.base()) + (f.evaluate(l2) - f.base());
    const double scale = 1.0 + f.base().norm() + l1.norm() + l2.norm();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13 * scale);
  }
}

namespace {

KypProblem problem_with(const Matrix& A, const Matrix& B) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  KypProblem prob;
  prob.A = A;
  prob.B = B;
  prob.c = Vector::Zero(1);
  prob.Sigma = Matrix::Identity(n, n);
  prob.Q = AffineMatrixFamily::constant(-Matrix::Identity(n, n), 1, true);
  prob.S = AffineMatrixFamily::constant(Matrix::Zero(n, m), 1, false);
  prob.R = AffineMatrixFamily::constant(-Matrix::Identity(m, m), 1, true);
  prob.N = AffineMatrixFamily(Matrix::Zero(1, 1), {Matrix::Ones(1, 1)}, true);
  return prob;
}

}  // namespace

TEST(ValidateProblem, IntegratorChainIsControllable) {
  Matrix A(2, 2);
  A << 0, 1, 0, 0;
  Matrix B(2, 1);
  B << 0, 1;
  const ValidationReport rep = validate_problem(problem_with(A, B));
  EXPECT_TRUE(rep.ok());
  EXPECT_TRUE(rep.findings.empty());
}

TEST(ValidateProblem, UnreachableStateIsReported) {
  Matrix B(2, 1);
  B << 1, 0;
  const ValidationReport rep = validate_problem(problem_with(Matrix::Identity(2, 2), B));
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(rep.has("uncontrollable"));
}

TEST(ValidateProblem, IndefiniteSigmaIsReported) {
  Matrix A(2, 2);
  A << 0, 1, 0, 0;
  Matrix B(2, 1);
  B << 0, 1;
  KypProblem prob = problem_with(A, B);
  prob.Sigma << 1, 0, 0, -1;
  const ValidationReport rep = validate_problem(prob);
  EXPECT_FALSE(rep.ok());
  ASSERT_TRUE(rep.has("sigma_not_psd"));
  bool named = false;
  for (const auto& f : rep.findings) named |= f.message.find("Sigma not PSD") != std::string::npos;
  EXPECT_TRUE(named);
}

TEST(ValidateProblem, NonSymmetricCoefficientNamesFamilyAndIndex) {
  KypProblem prob = scalar_s1();
  Matrix Q1(2, 2);
  Q1 << 0, 1, 0, 0;
  prob.A = Matrix::Zero(2, 2);
  prob.B = Matrix::Identity(2, 2);
  prob.Sigma = Matrix::Identity(2, 2);
  prob.Q = AffineMatrixFamily(Matrix::Zero(2, 2), {Q1}, true);
  prob.S = AffineMatrixFamily::constant(Matrix::Zero(2, 2), 1, false);
  prob.R = AffineMatrixFamily::constant(-Matrix::Identity(2, 2), 1, true);
  const ValidationReport rep = validate_problem(prob);
  EXPECT_FALSE(rep.ok());
  bool named = false;
  for (const auto& f : rep.findings) {
    named |= f.code == "not_symmetric" &&
             f.message.find("family Q coefficient 1") != std::string::npos;
  }
  EXPECT_TRUE(named);
}

TEST(ValidateProblem, CoefficientCountMismatch) {
  KypProblem prob = scalar_s1();
  prob.N = AffineMatrixFamily(Matrix::Zero(1, 1), {Matrix::Ones(1, 1), Matrix::Ones(1, 1)}, true);
  EXPECT_TRUE(validate_problem(prob).has("coeff_count"));
}

TEST(ValidateProblem, DimensionMismatch) {
  KypProblem prob = scalar_s1();
  prob.B = Matrix::Ones(2, 1);
  EXPECT_TRUE(validate_problem(prob).has("dimension"));
}

TEST(ValidateProblem, IsPure) {
  std::mt19937_64 rng(3);
  const KypProblem prob = random_feasible_instance(rng, 4, 2, 2).prob;
  const ValidationReport a = validate_problem(prob);
  const ValidationReport b = validate_problem(prob);
  ASSERT_EQ(a.findings.size(), b.findings.size());
  for (std::size_t k = 0; k < a.findings.size(); ++k) {
    EXPECT_EQ(a.findings[k].code, b.findings[k].code);
    EXPECT_EQ(a.findings[k].message, b.findings[k].message);
  }
  EXPECT_TRUE(a.ok());
}

TEST(Controllability, BadlyScaledChainStaysControllable) {
  // Krylov blocks would grow like 10^k here.
  const int n = 8;
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i + 1, i) = 10.0;
  Matrix B = Matrix::Zero(n, 1);
  B(0, 0) = 1.0;
  EXPECT_TRUE(is_controllable(A, B));
}
