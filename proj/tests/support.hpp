#pragma once

// Test-side oracles. Nothing here calls into the geometry or solver code; the
// formulas are re-derived directly from first-step analysis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Vector dirichlet_row(std::mt19937_64& rng, Index n, double alpha = 1.0) {
  std::gamma_distribution<double> g(alpha, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v / v.sum();
}

/// Stochastic matrix with Dirichlet rows; every entry positive, so irreducible.
inline Matrix random_stochastic(std::mt19937_64& rng, Index d, double alpha = 1.0) {
  Matrix P(d, d);
  for (Index i = 0; i < d; ++i) P.row(i) = dirichlet_row(rng, d, alpha).transpose();
  return P;
}

/// Stationary law from the null space of (P^T - I) via a full-pivot LU kernel.
inline Vector stationary(const Matrix& P) {
  const Index d = P.rows();
  Matrix A = P.transpose() - Matrix::Identity(d, d);
  A.row(d - 1).setOnes();  // replace one balance equation by normalisation
  Vector b = Vector::Zero(d);
  b(d - 1) = 1.0;
  return A.fullPivLu().solve(b);
}

/// C(i, j): expected cost accumulated before first hitting j, cost cbar(X_n)
/// charged at every step n < tau_j. Solves (I - P) restricted to S \ {j}.
inline Matrix excursion_costs(const Matrix& P, const Vector& cbar) {
  const Index d = P.rows();
  Matrix C = Matrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    std::vector<Index> keep;
    for (Index i = 0; i < d; ++i)
      if (i != j) keep.push_back(i);
    const Index n = static_cast<Index>(keep.size());
    Matrix A(n, n);
    Vector b(n);
    for (Index a = 0; a < n; ++a) {
      b(a) = cbar(keep[a]);
      for (Index c = 0; c < n; ++c) A(a, c) = (a == c ? 1.0 : 0.0) - P(keep[a], keep[c]);
    }
    const Vector x = A.colPivHouseholderQr().solve(b);
    for (Index a = 0; a < n; ++a) C(keep[a], j) = x(a);
  }
  return C;
}

/// min_i (y_i - max_u (P^u_i y - cbar^u_i)) over a finite control family.
inline double slack(const Vector& y, const std::vector<Matrix>& P, const std::vector<Vector>& c) {
  double s = INFINITY;
  for (Index i = 0; i < y.size(); ++i) {
    double ob = -INFINITY;
    for (std::size_t u = 0; u < P.size(); ++u) ob = std::max(ob, P[u].row(i).dot(y) - c[u](i));
    s = std::min(s, y(i) - ob);
  }
  return s;
}

/// Quadratic-cost cyclic family on [0,1]: row i puts u on i+1 and 1-u on i+2,
/// cost 1 - u(1-u). The obstacle is a concave quadratic in u; maximised by
/// ternary search so no closed form is shared with the library.
inline double cyclic_obstacle(const Vector& y, Index i) {
  const double a = y((i + 1) % 3), b = y((i + 2) % 3);
  auto q = [&](double u) { return u * a + (1.0 - u) * b - (1.0 - u * (1.0 - u)); };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (q(m1) < q(m2)) lo = m1;
    else hi = m2;
  }
  return std::max({q(0.0), q(1.0), q(0.5 * (lo + hi))});
}

inline double cyclic_slack(const Vector& y) {
  double s = INFINITY;
  for (Index i = 0; i < 3; ++i) s = std::min(s, y(i) - cyclic_obstacle(y, i));
  return s;
}

}  // namespace oracle
