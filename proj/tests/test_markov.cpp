#include <gtest/gtest.h>

#include <random>

#include "oswitch/errors.hpp"
#include "oswitch/markov.hpp"
#include "oswitch/model.hpp"
#include "support.hpp"

using namespace oswitch;

namespace {

Matrix half_chain() {
  Matrix P = Matrix::Constant(3, 3, 0.5);
  P.diagonal().setZero();
  return P;
}

}  // namespace

TEST(ValidateModel, AcceptsExampleFamilies) {
  for (const auto& m : {builtin::example1(), builtin::example2(), builtin::example3(11, false)}) {
    const auto r = validate_model(m.P, m.cbar);
    EXPECT_TRUE(r.valid) << m.name;
  }
}

TEST(ValidateModel, ReportsRowSumNegativeEntryAndUnitDiagonal) {
  Matrix P = half_chain();
  P(0, 1) = 0.6;  // row sum 1.1
  P(1, 0) = -0.1;
  P(1, 2) = 1.1;
  P(2, 0) = 0.0;
  P(2, 1) = 0.0;
  P(2, 2) = 1.0;
  const std::vector<Matrix> Ps{P};
  const std::vector<Vector> cs{Vector::Ones(3)};
  const auto r = validate_model(Ps, cs);
  EXPECT_FALSE(r.valid);
  ASSERT_EQ(r.rowDefects.size(), 1u);
  EXPECT_EQ(r.rowDefects[0].row, 0);
  ASSERT_EQ(r.negativeEntries.size(), 1u);
  EXPECT_EQ(r.negativeEntries[0].row, 1);
  EXPECT_EQ(r.negativeEntries[0].col, 0);
  ASSERT_EQ(r.unitDiagonal.size(), 1u);
  EXPECT_EQ(r.unitDiagonal[0].row, 2);
}

TEST(ValidateModel, CostRange) {
  const auto m = builtin::signed_two_control();
  const auto r = validate_model(m.P, m.cbar);
  EXPECT_DOUBLE_EQ(r.cHat, -0.5);
  EXPECT_DOUBLE_EQ(r.cCheck, 1.5);
}

TEST(ValidateModel, StructuralProblemsThrow) {
  const std::vector<Matrix> none;
  const std::vector<Vector> noCost;
  EXPECT_THROW(validate_model(none, noCost), ConfigError);
  const std::vector<Matrix> Ps{half_chain()};
  const std::vector<Vector> wrong{Vector::Ones(2)};
  EXPECT_THROW(validate_model(Ps, wrong), ConfigError);
}

TEST(Irreducible, CyclicPermutationAndReducibleBlock) {
  EXPECT_TRUE(irreducible(builtin::example1().P[0]));
  Matrix B = Matrix::Zero(4, 4);
  B.topLeftCorner(2, 2) << 0.5, 0.5, 0.5, 0.5;
  B.bottomRightCorner(2, 2) << 0.5, 0.5, 0.5, 0.5;
  EXPECT_FALSE(irreducible(B));
  // One-way edge into the second block keeps it reducible.
  B(1, 2) = 0.1;
  B(1, 1) = 0.4;
  EXPECT_FALSE(irreducible(B));
  // A tiny but positive entry counts: there is no threshold.
  B(3, 0) = 1e-300;
  B(3, 3) = 0.5 - 1e-300;
  EXPECT_TRUE(irreducible(B));
}

TEST(AnalyzeChain, MatchesFirstStepOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const Index d = 2 + k % 6;
    const Matrix P = oracle::random_stochastic(rng, d);
    Vector c(d);
    for (Index i = 0; i < d; ++i) c(i) = normal(rng);
    const ChainAnalysis a = analyze_chain(P, c);
    EXPECT_LT((a.mu - oracle::stationary(P)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.C - oracle::excursion_costs(P, c)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(a.muCbar, a.mu.dot(c), 1e-12);
    EXPECT_EQ(a.C.diagonal().cwiseAbs().maxCoeff(), 0.0);
    // muTilde is proportional to mu.
    EXPECT_LT((a.muTilde / a.muTilde.sum() - a.mu).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(AnalyzeChain, ExampleTwoClosedForm) {
  const ChainAnalysis a = analyze_chain(half_chain(), Vector::Ones(3));
  EXPECT_LT((a.mu - Vector::Constant(3, 1.0 / 3.0)).cwiseAbs().maxCoeff(), 1e-15);
  // Hitting time of j from i is geometric(1/2): mean 2.
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(a.C(i, j), i == j ? 0.0 : 2.0, 1e-14);
  EXPECT_NEAR(a.CbarDiag(0), 3.0, 1e-14);
}

TEST(AnalyzeChain, ReducibleIsGeometryError) {
  Matrix P = Matrix::Identity(3, 3) * 0.5;
  P(0, 1) = 0.5;
  P(1, 0) = 0.5;
  P(2, 2) = 1.0;
  EXPECT_THROW(analyze_chain(P, Vector::Ones(3)), GeometryError);
}

TEST(KilledFundamental, InverseOfReducedQ) {
  const Matrix P = half_chain();
  const Matrix F = killed_fundamental_matrix(P, 2);
  const Matrix Qr = Matrix::Identity(2, 2) - P.topLeftCorner(2, 2);
  EXPECT_LT((F * Qr - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AbsorptionMoments, AgreesWithSimulation) {
  Matrix Ps(2, 2);
  Ps << 0.2, 0.3, 0.4, 0.1;
  const auto m = absorption_moments(Ps);
  // Simulate: from each transient state move inside with Ps, absorbed otherwise.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index start = 0; start < 2; ++start) {
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int r = 0; r < n; ++r) {
      Index s = start;
      int steps = 0;
      while (true) {
        ++steps;
        const double u = unif(rng);
        if (u < Ps(s, 0)) s = 0;
        else if (u < Ps(s, 0) + Ps(s, 1)) s = 1;
        else break;
      }
      s1 += steps;
      s2 += static_cast<double>(steps) * steps;
    }
    const double mean = s1 / n, var = s2 / n - mean * mean;
    EXPECT_NEAR(m.expectedSteps(start), mean, 4.0 * std::sqrt(var / n));
    EXPECT_NEAR(m.secondMoment(start), s2 / n, 0.02 * m.secondMoment(start));
  }
}

TEST(AbsorptionMoments, RefusesNonAbsorbing) {
  Matrix Ps(2, 2);
  Ps << 0.5, 0.5, 0.5, 0.5;
  EXPECT_THROW(absorption_moments(Ps), StabilityError);
}

TEST(Adjugate, CofactorDefinition) {
  Matrix A(3, 3);
  A << 2, -1, 0, 1, 3, 4, 0, 5, 1;
  EXPECT_LT((A * adjugate(A) - A.determinant() * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AdjugateIdentity, CyclicPermutationIsExact) {
  const auto r = adjugate_identity_check(builtin::example1().P[0]);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(AdjugateIdentity, RandomChains) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 30; ++k) {
    const Matrix P = oracle::random_stochastic(rng, 3 + k % 4);
    EXPECT_LT(adjugate_identity_check(P).residual, 1e-12);
  }
}

TEST(AdjugateIdentity, NeedsThreeStates) {
  Matrix P(2, 2);
  P << 0.5, 0.5, 0.5, 0.5;
  EXPECT_THROW(adjugate_identity_check(P), CapabilityError);
}
