#include <gtest/gtest.h>

#include <random>

#include "oswitch/errors.hpp"
#include "oswitch/reflection.hpp"
#include "support.hpp"

using namespace oswitch;

TEST(Copositivity, BasicCases) {
  EXPECT_EQ(copositivity_check(Matrix::Identity(3, 3)).status, Copositivity::strict);
  // Nonnegative but indefinite: strictly copositive.
  EXPECT_EQ(copositivity_check(Matrix{{1, 2}, {2, 1}}).status, Copositivity::strict);
  // Zero diagonal: e_1 is a witness.
  const auto r = copositivity_check(Matrix{{0, 1}, {1, 1}});
  EXPECT_EQ(r.status, Copositivity::not_strict);
  EXPECT_NEAR(r.minValue, 0.0, 1e-14);
  EXPECT_GE(r.witness.minCoeff(), 0.0);
  EXPECT_NEAR(r.witness.maxCoeff(), 1.0, 1e-14);
  // Negative off-diagonal strong enough to break it on the simplex.
  const auto s = copositivity_check(Matrix{{1, -2}, {-2, 1}});
  EXPECT_EQ(s.status, Copositivity::not_strict);
  EXPECT_LT(s.minValue, 0.0);
}

TEST(MarkovianVertexMatrix, MapsNormalsToMinusUnitVectors) {
  std::mt19937_64 rng(44);
  for (int k = 0; k < 20; ++k) {
    const Index d = 3 + k % 3;
    const Matrix P = oracle::random_stochastic(rng, d);
    const Matrix Q = Matrix::Identity(d, d) - P;
    for (Index j = 0; j < d; ++j) {
      const Matrix H = markovian_vertex_matrix(Q, j);
      for (Index i = 0; i < d; ++i) {
        if (i == j) continue;
        Vector target = Vector::Zero(d);
        target(i) = -1.0;
        EXPECT_LT((H * (-Q.row(i).transpose()) - target).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(BuildH, MarkovianExampleTwoPasses) {
  const auto f = build_H_markovian(builtin::example2());
  const auto c = verify_H(f, 300, 2);
  EXPECT_TRUE(c.passed) << c.to_record();
  EXPECT_LE(c.translationDefect, 1e-12);
}

TEST(BuildH, MarkovianRejectsCounterexampleChain) {
  EXPECT_THROW(build_H_markovian(builtin::dim4()), GeometryError);
  EXPECT_THROW(build_H_markovian(builtin::example1()), CapabilityError);
}

TEST(BuildH, Dim3HalfVertexScalar) {
  const auto f = build_H_dim3(0.5, 0.5, 0.5, Vector::Ones(3));
  // Scalar 1/(pq(1-pq)) = 16/3 at p = q = 1/2.
  const Matrix expected = 16.0 / 3.0 * Matrix{{1.5, 1.0, 1.25}, {1.0, 1.0, 1.0}, {1.25, 1.0, 1.5}};
  EXPECT_LT((f.vertexMatrices[1] - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((f.vertexMatrices[1] * Vector{{-1.0, 0.5, 0.5}} - Vector{{-2.0, 0.0, 0.0}}).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(build_H_dim3(0.0, 0.5, 0.5, Vector::Ones(3)), GeometryError);
  EXPECT_THROW(build_H_dim3(0.5, 1.0, 0.5, Vector::Ones(3)), GeometryError);
}

TEST(BuildH, Dim3AsymmetricParametersPass) {
  for (const Vector& pqr : {Vector{{0.2, 0.7, 0.4}}, Vector{{0.9, 0.1, 0.5}}}) {
    const auto f = build_H_dim3(pqr(0), pqr(1), pqr(2), Vector::Ones(3));
    const auto c = verify_H(f, 300, 4);
    EXPECT_TRUE(c.passed) << c.to_record();
  }
}

TEST(BuildH, SymmetricFamilyClosedForms) {
  for (int d = 3; d <= 6; ++d) {
    const double g = static_cast<double>(d - 1) / d;
    EXPECT_NEAR(symmetric_family_det(d), (2 - 2 * g) * (d - 1) * std::pow(g, d - 2), 1e-14);
    EXPECT_NEAR(symmetric_family_trace(d), 2.0 * d - 2 * g, 1e-14);
    const Matrix H = symmetric_family_last_vertex(d);
    EXPECT_NEAR(H.determinant(), symmetric_family_det(d), 1e-10);
    // (d-1)/d is an eigenvalue of multiplicity d-2.
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    int hits = 0;
    for (Index k = 0; k < d; ++k) hits += std::abs(es.eigenvalues()(k) - g) < 1e-10;
    EXPECT_EQ(hits, d - 2);
  }
  EXPECT_THROW(build_H_symmetric(2), CapabilityError);
}

TEST(BuildH, ControlledVerticesOnly) {
  const auto f = build_H_controlled_dim3_vertices();
  EXPECT_TRUE(f.vertexOnly);
  EXPECT_EQ(f.evaluate(Vector{{1, 0, 0}}), (Matrix{{1, 1, 1}, {1, 2, 1}, {1, 1, 2}}));
  // Same point of D after translation along the diagonal.
  EXPECT_EQ(f.evaluate(Vector{{0, -1, -1}}), f.evaluate(Vector{{1, 0, 0}}));
  EXPECT_THROW(f.evaluate(Vector{{0.2, 0.2, 0}}), CapabilityError);
  EXPECT_TRUE(verify_H(f, 30, 1).passed);
}

TEST(ReflectionField, InterpolatesOnFaces) {
  const auto f = build_H_dim3(0.3, 0.6, 0.5, Vector::Ones(3));
  const Vector y = 0.25 * f.vertices.col(0) + 0.75 * f.vertices.col(1);
  const Matrix expected = 0.25 * f.vertexMatrices[0] + 0.75 * f.vertexMatrices[1];
  EXPECT_LT((f.evaluate(y) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((f.evaluate((y.array() + 3.0).matrix()) - expected).cwiseAbs().maxCoeff(), 1e-12);
  // Outside D the field uses the Euclidean projection.
  const Vector out = y * 3.0;
  const Matrix Hout = f.evaluate(out);
  EXPECT_LT((Hout - f.evaluate(euclidean_project(out, f.model))).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Dim4, WitnessHasZeroQuadraticForm) {
  const auto w = dim4_counterexample();
  EXPECT_TRUE(w.valid);
  EXPECT_TRUE(w.irreducible);
  EXPECT_LE(std::abs(w.vHv), 1e-12);
  EXPECT_EQ(w.copositivity.status, Copositivity::not_strict);
}

TEST(VerifyH, Deterministic) {
  const auto f = build_H_symmetric(4);
  EXPECT_EQ(verify_H(f, 200, 9).to_record(), verify_H(f, 200, 9).to_record());
}
