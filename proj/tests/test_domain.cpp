#include <gtest/gtest.h>

#include <random>

#include "oswitch/domain.hpp"
#include "oswitch/errors.hpp"
#include "oswitch/lp.hpp"
#include "support.hpp"

using namespace oswitch;

namespace {

// Least element of {z >= y} ∩ D as the LP  min sum z  s.t.  z >= y, (P^u_i - e_i) z <= c^u_i.
Vector least_element_lp(const Vector& y, const ControlledTransitionModel& m) {
  const Index d = m.d;
  const Index rows = d + static_cast<Index>(m.control_count()) * d;
  Matrix A = Matrix::Zero(rows, d);
  Vector b(rows);
  for (Index i = 0; i < d; ++i) {
    A(i, i) = -1.0;
    b(i) = -y(i);
  }
  Index r = d;
  for (std::size_t u = 0; u < m.control_count(); ++u)
    for (Index i = 0; i < d; ++i, ++r) {
      A.row(r) = m.P[u].row(i);
      A(r, i) -= 1.0;
      b(r) = m.cbar[u](i);
    }
  const LpResult res = solve_lp(Vector::Ones(d), A, b);
  EXPECT_EQ(res.status, LpStatus::optimal);
  return res.x;
}

ControlledTransitionModel random_controlled(std::mt19937_64& rng, Index d, int controls) {
  std::uniform_real_distribution<double> unif(0.1, 1.5);
  ControlledTransitionModel m;
  m.name = "random";
  m.d = d;
  for (int u = 0; u < controls; ++u) {
    m.controls.push_back(u);
    Matrix P = oracle::random_stochastic(rng, d);
    m.P.push_back(P);
    Vector c(d);
    for (Index i = 0; i < d; ++i) c(i) = unif(rng);
    m.cbar.push_back(c);
  }
  return m;
}

}  // namespace

TEST(Lp, SmallProgramsWithKnownOptima) {
  // max x + y  s.t.  x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  (8/5, 6/5)
  Matrix A(4, 2);
  A << 1, 2, 3, 1, -1, 0, 0, -1;
  const Vector b{{4, 6, 0, 0}};
  const auto r = solve_lp(Vector{{-1, -1}}, A, b);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.x(0), 1.6, 1e-12);
  EXPECT_NEAR(r.x(1), 1.2, 1e-12);
  // Negative right-hand sides need phase one: x >= 2, y >= 3, min x + y.
  Matrix B(2, 2);
  B << -1, 0, 0, -1;
  const auto r2 = solve_lp(Vector{{1, 1}}, B, Vector{{-2, -3}});
  ASSERT_EQ(r2.status, LpStatus::optimal);
  EXPECT_NEAR(r2.objective, 5.0, 1e-12);
}

TEST(Lp, InfeasibleAndUnbounded) {
  Matrix A(2, 1);
  A << 1, -1;
  EXPECT_EQ(solve_lp(Vector{{1}}, A, Vector{{-1, -1}}).status, LpStatus::infeasible);  // x <= -1, x >= 1
  Matrix B(1, 1);
  B << 1;
  EXPECT_EQ(solve_lp(Vector{{-1}}, Matrix{{-1}}, Vector{{0}}).status, LpStatus::unbounded);
}

TEST(Obstacle, ClosedFormMatchesGridMaximum) {
  const auto cont = builtin::example3(101, true);
  const auto grid = builtin::example3(20001, false);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const Vector y{{unif(rng), unif(rng), unif(rng)}};
    for (Index i = 0; i < 3; ++i) {
      const double exact = obstacle(y, i, cont);
      EXPECT_NEAR(exact, oracle::cyclic_obstacle(y, i), 1e-12);
      EXPECT_LE(obstacle(y, i, grid), exact + 1e-15);
      EXPECT_NEAR(obstacle(y, i, grid), exact, 1e-8);
    }
  }
}

TEST(Obstacle, TiesResolveToSmallestControl) {
  // Two controls with identical rows and costs tie everywhere.
  ControlledTransitionModel m;
  m.name = "tie";
  m.d = 2;
  m.controls = {0.25, 0.75};
  const Matrix P{{0.0, 1.0}, {1.0, 0.0}};
  m.P = {P, P};
  m.cbar = {Vector::Ones(2), Vector::Ones(2)};
  const ActiveControl ac = obstacle_argmax(Vector{{0.0, 3.0}}, 0, m);
  EXPECT_EQ(ac.index, 0u);
  EXPECT_EQ(ac.u, 0.25);
}

TEST(Membership, ExampleTwoTriangle) {
  const auto m = builtin::example2();
  EXPECT_TRUE(membership(Vector{{0, 0, 0}}, m).member);
  EXPECT_TRUE(membership(Vector{{2, 0, 0}}, m).member);
  EXPECT_NEAR(membership(Vector{{2, 0, 0}}, m).slack, 0.0, 1e-15);
  EXPECT_FALSE(membership(Vector{{2.1, 0, 0}}, m).member);
  // Translation along the diagonal leaves membership unchanged.
  EXPECT_NEAR(membership(Vector{{7.3, 5.3, 5.3}}, m).slack, membership(Vector{{2, 0, 0}}, m).slack, 1e-14);
}

TEST(Nonemptiness, ExampleVerdicts) {
  EXPECT_EQ(nonemptiness_report(builtin::example2()).verdict, Verdict::nonempty_interior);
  EXPECT_EQ(nonemptiness_report(builtin::symmetric(3, 0.0)).verdict, Verdict::nonempty_empty_interior);
  const auto cert = nonemptiness_report(builtin::signed_two_control());
  EXPECT_EQ(cert.verdict, Verdict::empty);
  ASSERT_TRUE(cert.muChat.has_value());
  EXPECT_NEAR(*cert.muChat, -1.0 / 30.0, 1e-14);
  EXPECT_GT(cert.ChatPairMin, 0.0);
}

TEST(Nonemptiness, UncontrolledSlackIsCappedMuCbar) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Index d = 2 + k % 5;
    const Matrix P = oracle::random_stochastic(rng, d);
    Vector c(d);
    for (Index i = 0; i < d; ++i) c(i) = 0.3 * normal(rng);
    const auto cert = nonemptiness_report(builtin::uncontrolled(P, c));
    EXPECT_NEAR(cert.lpSlack, std::min(oracle::stationary(P).dot(c), 1.0), 1e-9);
  }
}

TEST(InteriorPoint, EmptyInteriorThrows) {
  EXPECT_THROW(interior_point(builtin::symmetric(3, 0.0)), GeometryError);
  const Vector y = interior_point(builtin::example2());
  EXPECT_GT(membership(y, builtin::example2()).slack, 0.0);
}

TEST(SliceVertices, ExampleTwo) {
  const Matrix V = slice_vertices(builtin::example2());
  const Matrix expected{{2, 0, -2}, {0, 2, -2}, {0, 0, 0}};
  EXPECT_LT((V - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BarycentricCone, FacesAndOutsidePoints) {
  const auto m = builtin::example2();
  const Matrix V = slice_vertices(m);
  const Matrix Q = Matrix::Identity(3, 3) - m.P[0];
  const Vector mid = 0.5 * (V.col(0) + V.col(1));
  const ConeInfo info = barycentric_and_normal_cone(mid, V, Q);
  EXPECT_NEAR(info.lambda(0), 0.5, 1e-14);
  EXPECT_NEAR(info.lambda(2), 0.0, 1e-14);
  ASSERT_EQ(info.generators.size(), 1u);
  EXPECT_LT((info.generators[0] + Q.row(2).transpose()).norm(), 1e-15);
  EXPECT_THROW(barycentric_and_normal_cone(Vector{{3, 0, 0}}, V, Q), GeometryError);
}

TEST(EuclideanProject, IdempotentAndNonExpansive) {
  const auto m = builtin::example3(21, false);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    const Vector a{{unif(rng), unif(rng), unif(rng)}}, b{{unif(rng), unif(rng), unif(rng)}};
    const Vector pa = euclidean_project(a, m), pb = euclidean_project(b, m);
    EXPECT_GE(membership(pa, m).slack, -1e-9);
    EXPECT_LT((euclidean_project(pa, m) - pa).norm(), 1e-9);
    EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-9);
    // Variational inequality against a few members.
    for (const Vector& w : {Vector{{0, 0, 0}}, pb})
      EXPECT_LE((a - pa).dot(w - pa), 1e-8);
  }
}

TEST(ObliqueProject, MatchesLeastElementLp) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int k = 0; k < 60; ++k) {
    const Index d = 2 + k % 4;
    const auto m = random_controlled(rng, d, 1 + k % 3);
    Vector y(d);
    for (Index i = 0; i < d; ++i) y(i) = unif(rng);
    const auto pr = oblique_project(y, m);
    ASSERT_TRUE(pr.converged);
    const Vector z = least_element_lp(y, m);
    EXPECT_LT((pr.z - z).cwiseAbs().maxCoeff(), 1e-8) << "instance " << k;
    // Minimal pushing: only components on an active constraint move.
    for (Index i = 0; i < d; ++i) {
      EXPECT_GE(pr.z(i), y(i) - 1e-12);
      if (pr.z(i) > y(i) + 1e-9) EXPECT_NEAR(pr.z(i), obstacle(pr.z, i, m), 1e-9);
    }
    EXPECT_LE(pr.defect, 1e-9);
  }
}

TEST(ObliqueProject, MembersAreFixed) {
  const auto m = builtin::example2();
  const Vector y{{0.5, -0.2, 0.1}};
  EXPECT_EQ(oblique_project(y, m).z, y);
}

TEST(ShiftToPositiveCosts, NewDomainIsTranslate) {
  Matrix P = Matrix::Constant(3, 3, 0.5);
  P.diagonal().setZero();
  const auto m = builtin::uncontrolled(P, Vector{{-0.5, 1.2, 0.7}});
  const Vector y0 = interior_point(m);
  const auto s = shift_to_positive_costs(y0, m);
  EXPECT_GT(s.cbar[0].minCoeff(), 0.0);
  const Vector y{{0.3, -0.4, 1.0}};
  EXPECT_NEAR(membership(y, m).slack, membership(y - y0, s).slack, 1e-14);
  EXPECT_THROW(shift_to_positive_costs(Vector{{5, 0, 0}}, m), GeometryError);
  EXPECT_THROW(shift_to_positive_costs(Vector::Zero(3), builtin::example3()), CapabilityError);
}

TEST(TriangleCheck, PositiveCostsSatisfyIt) {
  const ChainAnalysis a = analyze_chain(builtin::example2().P[0], Vector::Ones(3));
  const auto r = triangle_check(a);
  EXPECT_TRUE(r.triangleOk);
  EXPECT_TRUE(r.roundTripsOk);
  EXPECT_NEAR(r.minRoundTrip, 4.0, 1e-12);
}

TEST(Polygon, ResolutionThreeGivesMembers) {
  const auto m = builtin::example3();
  const auto pts = emit_slice_polygon(m, 3);
  ASSERT_EQ(pts.size(), 3u);
  for (const auto& p : pts) EXPECT_GE(oracle::cyclic_slack(p), -1e-8);
  EXPECT_THROW(emit_slice_polygon(m, 2), ConfigError);
  EXPECT_THROW(emit_slice_polygon(builtin::signed_two_control(), 10), GeometryError);
}

TEST(Polygon, ContinuumBoundaryIsCurved) {
  // Midpoint of a chord between adjacent boundary points lies strictly inside.
  const auto pts = emit_slice_polygon(builtin::example3(), 90);
  int strictly = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vector mid = 0.5 * (pts[k] + pts[(k + 1) % pts.size()]);
    if (oracle::cyclic_slack(mid) > 1e-9) ++strictly;
  }
  EXPECT_GT(strictly, 60);
}

TEST(Polygon, GridCornersOfExampleOne) {
  const auto corners = slice_polygon_corners(builtin::example1());
  EXPECT_EQ(corners.size(), 6u);
  EXPECT_THROW(slice_polygon_corners(builtin::example3()), CapabilityError);
}
