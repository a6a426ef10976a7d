#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oswitch/errors.hpp"
#include "oswitch/rbsde.hpp"
#include "oswitch/simulator.hpp"
#include "support.hpp"

using namespace oswitch;

namespace {

using BaseFn = std::function<double(double, double)>;
using TermFn = std::function<double(double)>;

Driver driver_of(std::vector<BaseFn> f, std::vector<TermFn> g, double ay = 0.0) {
  const Index d = static_cast<Index>(f.size());
  return make_affine_driver(std::move(f), Vector::Constant(d, ay), Vector::Zero(d), std::move(g));
}

Driver mixed_driver() {
  return driver_of({[](double, double x) { return 1.0 + 0.5 * std::sin(x); }, [](double, double x) { return x; },
                    [](double t, double x) { return 2.0 * std::tanh(x) - 0.5 * t; }},
                   {[](double) { return 0.0; }, [](double x) { return 0.5 * x; },
                    [](double x) { return std::min(x, 1.0); }});
}

Lattice unit_lattice(int steps, int points = 0, Quadrature q = Quadrature::trinomial) {
  LatticeSpec spec;
  spec.steps = steps;
  spec.points = points;
  spec.mode = q;
  return build_lattice(SdeParams{}, spec);
}

}  // namespace

TEST(Lattice, TrinomialMatchesEulerMoments) {
  SdeParams sde{0.3, -0.1, 0.8, 0.05, 0.2};
  LatticeSpec spec;
  spec.steps = 25;
  const Lattice L = build_lattice(sde, spec);
  // Interior nodes only: the edge rows are clamped.
  for (int m = 1; m + 1 < L.points(); ++m) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (const auto& tr : L.transitions[m]) {
      const double dx = L.x(tr.target) - L.x(m);
      s0 += tr.weight;
      s1 += tr.weight * dx;
      s2 += tr.weight * dx * dx;
    }
    const double mu = sde.drift(L.x(m)) * L.dt, var = std::pow(sde.vol(L.x(m)), 2) * L.dt;
    EXPECT_NEAR(s0, 1.0, 1e-14);
    EXPECT_NEAR(s1, mu, 1e-14);
    EXPECT_NEAR(s2, var + mu * mu, 1e-14);
  }
}

TEST(Lattice, GaussianRowsAreNormalisedAndSymmetric) {
  const Lattice L = unit_lattice(10, 0, Quadrature::gaussian);
  for (const auto& row : L.transitions) {
    double s = 0.0;
    for (const auto& tr : row) s += tr.weight;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  // Zero drift: the root row is symmetric about the root.
  const int r = L.rootIndex;
  std::map<int, double> w;
  for (const auto& tr : L.transitions[r]) w[tr.target - r] = tr.weight;
  for (const auto& [off, wt] : w) EXPECT_NEAR(wt, w[-off], 1e-14);
}

TEST(Lattice, Refusals) {
  LatticeSpec spec;
  spec.mode = Quadrature::gaussian;
  spec.spacing = 1.0;  // sigma sqrt(dt) ~ 0.22
  EXPECT_THROW(build_lattice(SdeParams{}, spec), StabilityError);
  spec.mode = Quadrature::trinomial;
  spec.spacing = 0.1;  // needs >= sqrt(dt) ~ 0.22
  EXPECT_THROW(build_lattice(SdeParams{}, spec), StabilityError);
  spec.spacing = 0.0;
  spec.points = 4;
  EXPECT_THROW(build_lattice(SdeParams{}, spec), ConfigError);
  spec.points = 0;
  spec.steps = 0;
  EXPECT_THROW(build_lattice(SdeParams{}, spec), ConfigError);
}

TEST(Solve, InteriorTerminalWithZeroDriverStaysPut) {
  const auto m = builtin::example2();
  const Lattice L = unit_lattice(8);
  const Vector c{{0.4, -0.3, 0.1}};
  const auto sol = solve(m, L, driver_of({[](double, double) { return 0.0; }, [](double, double) { return 0.0; },
                                          [](double, double) { return 0.0; }},
                                         {[&](double) { return c(0); }, [&](double) { return c(1); },
                                          [&](double) { return c(2); }}));
  for (int k = 0; k <= 8; ++k)
    for (int n = 0; n < L.points(); ++n) EXPECT_LT((sol.Yvec(k, n) - c).cwiseAbs().maxCoeff(), 1e-14);
  for (double kinc : sol.Kv) EXPECT_EQ(kinc, 0.0);
}

TEST(Solve, HugeCostsReduceToUnreflectedRecursion) {
  auto m = builtin::example2(1e6);
  const Lattice L = unit_lattice(12);
  const Driver drv = mixed_driver();
  const auto sol = solve(m, L, drv);
  // Independent backward recursion per mode.
  const int M = L.points();
  for (Index i = 0; i < 3; ++i) {
    Vector V(M);
    for (int n = 0; n < M; ++n) V(n) = drv.g(i, L.x(n));
    for (int k = 11; k >= 0; --k) {
      Vector W(M);
      for (int n = 0; n < M; ++n) {
        double e = 0.0;
        for (const auto& tr : L.transitions[n]) e += tr.weight * V(tr.target);
        W(n) = e + L.dt * drv.f(i, L.time(k), L.x(n), 0.0, 0.0);
      }
      V = W;
    }
    for (int n = 0; n < M; ++n) EXPECT_NEAR(sol.Y(0, n, i), V(n), 1e-11);
  }
}

TEST(Solve, AgreesWithValueIterationOnRandomModels) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unif(0.05, 0.8);
  const Lattice L = unit_lattice(6, 9);
  for (int k = 0; k < 8; ++k) {
    ControlledTransitionModel m;
    m.name = "random";
    m.d = 3;
    for (int u = 0; u < 1 + k % 3; ++u) {
      m.controls.push_back(u);
      Matrix P = oracle::random_stochastic(rng, 3);
      P.diagonal().setZero();
      for (Index r = 0; r < 3; ++r) P.row(r) /= P.row(r).sum();
      m.P.push_back(P);
      m.cbar.push_back(Vector{{unif(rng), unif(rng), unif(rng)}});
    }
    const Driver drv = mixed_driver();
    const auto sol = solve(m, L, drv);
    const auto orc = dp_oracle(m, drv, L);
    double gap = 0.0;
    for (int s = 0; s <= 6; ++s)
      for (int n = 0; n < L.points(); ++n)
        for (Index i = 0; i < 3; ++i) gap = std::max(gap, std::abs(sol.Y(s, n, i) - orc.V_at(s, n, i)));
    EXPECT_LT(gap, 1e-10) << "instance " << k;
    EXPECT_LT(sol.diagnostics.membershipDefect, 1e-9);
    EXPECT_LT(sol.diagnostics.skorokhodDefect, 1e-9);
  }
}

TEST(Solve, ComparisonInDriver) {
  const auto m = builtin::example3(21, false);
  const Lattice L = unit_lattice(10);
  const auto low = solve(m, L, mixed_driver());
  Driver up = mixed_driver();
  const auto f = up.f;
  up.f = [f](Index i, double t, double x, double y, double z) { return f(i, t, x, y, z) + (i == 1 ? 0.3 : 0.0); };
  const auto high = solve(m, L, up);
  for (std::size_t n = 0; n < low.Yv.size(); ++n) EXPECT_GE(high.Yv[n], low.Yv[n] - 1e-12);
  EXPECT_GT(high.root()(1), low.root()(1));
}

TEST(Solve, TranslationAlongDiagonal) {
  const auto m = builtin::example1();
  const Lattice L = unit_lattice(10);
  const auto base = solve(m, L, mixed_driver());
  Driver moved = mixed_driver();
  const auto g = moved.g;
  const auto f = moved.f;
  moved.g = [g](Index i, double x) { return g(i, x) + 2.5; };
  moved.f = [f](Index i, double t, double x, double y, double z) { return f(i, t, x, y, z) - 1.0; };
  const auto sol = solve(m, L, moved);
  for (int k = 0; k <= 10; ++k)
    for (int n = 0; n < L.points(); ++n)
      for (Index i = 0; i < 3; ++i)
        EXPECT_NEAR(sol.Y(k, n, i), base.Y(k, n, i) + 2.5 - (1.0 - L.time(k)), 1e-12);
}

TEST(Solve, ClassicalTwoModesReflectsOnBothSides) {
  // Two modes, symmetric unit switching costs: the spread stays in [-1, 1].
  const auto m = classical_embedding(Matrix{{0, 1}, {1, 0}});
  const Lattice L = unit_lattice(10);
  const auto sol = solve(m, L, driver_of({[](double, double x) { return 3.0 * x; }, [](double, double) { return 0.0; }},
                                         {[](double x) { return x; }, [](double) { return 0.0; }}));
  for (int k = 0; k <= 10; ++k)
    for (int n = 0; n < L.points(); ++n) EXPECT_LE(std::abs(sol.Y(k, n, 0) - sol.Y(k, n, 1)), 1.0 + 1e-12);
}

TEST(Solve, SignedCostsUseShift) {
  const auto m = builtin::signed_two_control();
  const Lattice L = unit_lattice(6);
  EXPECT_THROW(solve(m, L, mixed_driver()), GeometryError);
  Matrix P = Matrix::Constant(3, 3, 0.5);
  P.diagonal().setZero();
  const auto signedModel = builtin::uncontrolled(P, Vector{{-0.5, 1.2, 0.7}});
  const auto sol = solve(signedModel, L, mixed_driver());
  EXPECT_TRUE(sol.diagnostics.shifted);
  EXPECT_LT(sol.diagnostics.membershipDefect, 1e-9);
}

TEST(Solve, PicardRefusesNonContractingStep) {
  const auto m = builtin::example2();
  const Lattice L = unit_lattice(10);
  EXPECT_THROW(solve(m, L, driver_of({[](double, double) { return 0.0; }, [](double, double) { return 0.0; },
                                      [](double, double) { return 0.0; }},
                                     {[](double) { return 0.0; }, [](double) { return 0.0; },
                                      [](double) { return 0.0; }},
                                     20.0)),
               StabilityError);
}

TEST(Solve, LinearInYMatchesImplicitRecursion) {
  // With huge costs each mode solves Y_k = E Y_{k+1} + dt (1 + a Y_k) on its own.
  const auto m = builtin::example2(1e6);
  const Lattice L = unit_lattice(10);
  const double a = 0.7;
  const auto sol = solve(m, L, driver_of({[](double, double) { return 1.0; }, [](double, double) { return 1.0; },
                                          [](double, double) { return 1.0; }},
                                         {[](double) { return 1.0; }, [](double) { return 1.0; },
                                          [](double) { return 1.0; }},
                                         a));
  double y = 1.0;
  for (int k = 0; k < 10; ++k) y = (y + L.dt) / (1.0 - a * L.dt);
  EXPECT_NEAR(sol.root()(0), y, 1e-10);
  EXPECT_GT(sol.diagnostics.picardIters, 1);
}

TEST(Refine, DifferencesShrinkOnExampleTwo) {
  std::vector<LatticeSpec> specs;
  for (int r = 0; r < 3; ++r) {
    LatticeSpec s;
    s.steps = 10 << r;
    specs.push_back(s);
  }
  const auto table = refine_and_extrapolate(builtin::example2(), SdeParams{}, specs, mixed_driver());
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_LT(table.rows[2].diff, table.rows[1].diff);
  specs.pop_back();
  EXPECT_THROW(refine_and_extrapolate(builtin::example2(), SdeParams{}, specs, mixed_driver()), ConfigError);
}

TEST(SolutionCsv, HeaderAndRowCount) {
  const Lattice L = unit_lattice(3, 5);
  const auto sol = solve(builtin::example2(), L, mixed_driver());
  std::ostringstream os;
  write_solution_csv(os, sol, {{"seed", "4"}});
  std::istringstream in(os.str());
  std::string line;
  int comments = 0, rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) ++comments;
    else if (!header) {
      EXPECT_EQ(line, "k,t,m,x,i,Y,Z,Kinc");
      header = true;
    } else {
      ++rows;
      EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
    }
  }
  EXPECT_EQ(rows, 4 * 5 * 3);
  EXPECT_GE(comments, 5);
}

TEST(Nnls, KnownAndEnumerated) {
  const Vector x = nnls(Matrix::Identity(2, 2), Vector{{1.0, -1.0}});
  EXPECT_NEAR(x(0), 1.0, 1e-14);
  EXPECT_EQ(x(1), 0.0);
  // Random small problems against enumeration of supports.
  std::mt19937_64 rng(71);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    Matrix A(6, 3);
    Vector b(6);
    for (Index r = 0; r < 6; ++r) {
      b(r) = normal(rng);
      for (Index c = 0; c < 3; ++c) A(r, c) = normal(rng);
    }
    double best = INFINITY;
    for (int mask = 0; mask < 8; ++mask) {
      std::vector<Index> cols;
      for (Index c = 0; c < 3; ++c)
        if (mask >> c & 1) cols.push_back(c);
      Vector sol = Vector::Zero(3);
      if (!cols.empty()) {
        Matrix As(6, static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) As.col(c) = A.col(cols[c]);
        const Vector s = As.colPivHouseholderQr().solve(b);
        if (s.minCoeff() < 0.0) continue;
        for (std::size_t c = 0; c < cols.size(); ++c) sol(cols[c]) = s(c);
      }
      best = std::min(best, (A * sol - b).norm());
    }
    const Vector got = nnls(A, b);
    EXPECT_GE(got.minCoeff(), 0.0);
    EXPECT_NEAR((A * got - b).norm(), best, 1e-10);
  }
}
