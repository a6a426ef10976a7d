#include "oswitch/lp.hpp"

#include <cmath>
#include <vector>

#include "oswitch/errors.hpp"

namespace oswitch {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

namespace {

constexpr double kPivotEps = 1e-11;

// Tableau rows 0..m-1 are constraints, row m is the reduced-cost row; the last
// column holds the right-hand side (and minus the objective in row m).
struct Tableau {
  Matrix T;
  std::vector<Index> basis;
  Index m = 0, n = 0;

  void pivot(Index r, Index c) {
    T.row(r) /= T(r, c);
    for (Index i = 0; i <= m; ++i)
      if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
    basis[r] = c;
  }

  // Runs Bland's rule over columns [0, allowed). Returns status.
  LpStatus run(Index allowed, int& iterations, int maxIterations) {
    while (true) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j)
        if (T(m, j) < -1e-10) {
          enter = j;
          break;
        }
      if (enter < 0) return LpStatus::optimal;
      Index leave = -1;
      double best = 0.0;
      for (Index i = 0; i < m; ++i) {
        if (T(i, enter) <= kPivotEps) continue;
        const double ratio = T(i, n) / T(i, enter);
        if (leave < 0 || ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
      if (++iterations > maxIterations) return LpStatus::iteration_limit;
    }
  }
};

}  // namespace

LpResult solve_lp(const Vector& c, const Matrix& A, const Vector& b, int maxIterations) {
  const Index m = A.rows(), nx = A.cols();
  if (c.size() != nx || b.size() != m) throw ConfigError("solve_lp: dimension mismatch");

  // Columns: x+ (nx), x- (nx), slacks (m), artificials (one per row with b < 0).
  std::vector<Index> artificialRow;
  for (Index i = 0; i < m; ++i)
    if (b(i) < 0.0) artificialRow.push_back(i);
  const Index nReal = 2 * nx + m;
  const Index nArt = static_cast<Index>(artificialRow.size());
  const Index n = nReal + nArt;

  Tableau tab;
  tab.m = m;
  tab.n = n;
  tab.T = Matrix::Zero(m + 1, n + 1);
  tab.basis.assign(m, -1);
  for (Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.T.block(i, 0, 1, nx) = sign * A.row(i);
    tab.T.block(i, nx, 1, nx) = -sign * A.row(i);
    tab.T(i, 2 * nx + i) = sign;
    tab.T(i, n) = sign * b(i);
    if (sign > 0) tab.basis[i] = 2 * nx + i;
  }
  for (Index k = 0; k < nArt; ++k) {
    const Index i = artificialRow[k];
    tab.T(i, nReal + k) = 1.0;
    tab.basis[i] = nReal + k;
  }

  LpResult res;
  if (nArt > 0) {
    // Phase 1: minimise the sum of artificials.
    for (Index k = 0; k < nArt; ++k) tab.T(m, nReal + k) = 1.0;
    for (Index k = 0; k < nArt; ++k) tab.T.row(m) -= tab.T.row(artificialRow[k]);
    const LpStatus s1 = tab.run(n, res.iterations, maxIterations);
    if (s1 == LpStatus::iteration_limit) {
      res.status = s1;
      return res;
    }
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (-tab.T(m, n) > 1e-9 * scale) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (Index i = 0; i < m; ++i) {
      if (tab.basis[i] < nReal) continue;
      for (Index j = 0; j < nReal; ++j)
        if (std::abs(tab.T(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
    }
  }

  // Phase 2 cost row over the real columns.
  tab.T.row(m).setZero();
  tab.T.block(m, 0, 1, nx) = c.transpose();
  tab.T.block(m, nx, 1, nx) = -c.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index bj = tab.basis[i];
    if (bj < nReal && tab.T(m, bj) != 0.0) tab.T.row(m) -= tab.T(m, bj) * tab.T.row(i);
  }
  res.status = tab.run(nReal, res.iterations, maxIterations);
  if (res.status != LpStatus::optimal) return res;

  Vector v = Vector::Zero(n);
  for (Index i = 0; i < m; ++i) v(tab.basis[i]) = tab.T(i, n);
  res.x = v.head(nx) - v.segment(nx, nx);
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace oswitch
