#include "oswitch/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oswitch/errors.hpp"

namespace oswitch {

Matrix remove_row_col(const Matrix& m, Index row, Index col) {
  const Index r = m.rows(), c = m.cols();
  Matrix out(r - 1, c - 1);
  for (Index i = 0, oi = 0; i < r; ++i) {
    if (i == row) continue;
    for (Index j = 0, oj = 0; j < c; ++j) {
      if (j == col) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

Vector remove_entry(const Vector& v, Index k) {
  Vector out(v.size() - 1);
  for (Index i = 0, o = 0; i < v.size(); ++i)
    if (i != k) out(o++) = v(i);
  return out;
}

Matrix adjugate(const Matrix& a) {
  const Index n = a.rows();
  Matrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const double minor = remove_row_col(a, c, r).determinant();
      adj(r, c) = ((r + c) % 2 == 0 ? 1.0 : -1.0) * minor;
    }
  return adj;
}

ValidationReport validate_model(std::span<const Matrix> P, std::span<const Vector> cbar) {
  if (P.empty()) throw ConfigError("validate_model: empty control family");
  if (P.size() != cbar.size())
    throw ConfigError("validate_model: " + std::to_string(P.size()) + " matrices but " +
                      std::to_string(cbar.size()) + " cost vectors");
  const Index d = P[0].rows();
  if (d < 2) throw ConfigError("validate_model: need at least 2 modes");

  ValidationReport rep;
  rep.cHat = std::numeric_limits<double>::infinity();
  rep.cCheck = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < P.size(); ++u) {
    const Matrix& m = P[u];
    if (m.rows() != d || m.cols() != d)
      throw ConfigError("validate_model: control " + std::to_string(u) + " matrix is " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        ", expected " + std::to_string(d) + "x" + std::to_string(d));
    if (cbar[u].size() != d)
      throw ConfigError("validate_model: control " + std::to_string(u) + " cost vector has " +
                        std::to_string(cbar[u].size()) + " entries, expected " +
                        std::to_string(d));
    if (!m.allFinite() || !cbar[u].allFinite())
      throw ConfigError("validate_model: non-finite entry for control " + std::to_string(u));
    for (Index i = 0; i < d; ++i) {
      const double s = m.row(i).sum();
      if (std::abs(s - 1.0) > 1e-9) {
        rep.rowDefects.push_back({u, i, s});
        std::ostringstream os;
        os.precision(17);
        os << "control " << u << " row " << i << " sums to " << s;
        rep.issues.push_back(os.str());
      }
      for (Index j = 0; j < d; ++j)
        if (m(i, j) < 0.0) {
          rep.negativeEntries.push_back({u, i, j});
          rep.issues.push_back("control " + std::to_string(u) + " entry (" + std::to_string(i) +
                               "," + std::to_string(j) + ") is negative");
        }
      if (m(i, i) == 1.0) {
        rep.unitDiagonal.push_back({u, i, i});
        rep.issues.push_back("control " + std::to_string(u) + " has P_{" + std::to_string(i) +
                             "," + std::to_string(i) + "} = 1");
      }
      rep.cHat = std::min(rep.cHat, cbar[u](i));
      rep.cCheck = std::max(rep.cCheck, cbar[u](i));
    }
  }
  rep.valid = rep.issues.empty();
  return rep;
}

namespace {

std::vector<bool> reach(const Matrix& P, bool transpose) {
  const Index d = P.rows();
  std::vector<bool> seen(d, false);
  std::vector<Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Index i = stack.back();
    stack.pop_back();
    for (Index j = 0; j < d; ++j) {
      const double w = transpose ? P(j, i) : P(i, j);
      if (w > 0.0 && !seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

}  // namespace

bool irreducible(const Matrix& P) {
  if (P.rows() == 0 || P.rows() != P.cols()) throw ConfigError("irreducible: matrix must be square");
  // Strongly connected iff node 0 reaches everything and everything reaches node 0.
  const auto fwd = reach(P, false);
  const auto bwd = reach(P, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

Matrix killed_fundamental_matrix(const Matrix& P, Index j) {
  const Index d = P.rows();
  const Matrix Q = Matrix::Identity(d, d) - P;
  const Matrix Qj = remove_row_col(Q, j, j);
  Eigen::PartialPivLU<Matrix> lu(Qj);
  return lu.inverse();
}

ChainAnalysis analyze_chain(const Matrix& P, const Vector& cbar) {
  const Index d = P.rows();
  if (P.cols() != d || cbar.size() != d)
    throw ConfigError("analyze_chain: dimension mismatch");
  if (!irreducible(P))
    throw GeometryError("analyze_chain: reducible chain, excursion costs undefined");

  ChainAnalysis a;
  a.Q = Matrix::Identity(d, d) - P;
  a.muTilde.resize(d);
  a.C = Matrix::Zero(d, d);
  a.conditionNumbers.resize(d);

  for (Index j = 0; j < d; ++j) {
    const Matrix Qj = remove_row_col(a.Q, j, j);
    Eigen::PartialPivLU<Matrix> lu(Qj);
    a.muTilde(j) = lu.determinant();
    const Matrix inv = lu.inverse();
    const double cond = Qj.cwiseAbs().colwise().sum().maxCoeff() *
                        inv.cwiseAbs().colwise().sum().maxCoeff();
    a.conditionNumbers(j) = cond;
    if (!(cond <= 1e12)) {
      std::ostringstream os;
      os << "Q^{(" << j << "," << j << ")} is ill-conditioned (cond_1 ~ " << cond << ")";
      a.warnings.push_back(os.str());
    }
    const Vector cj = inv * remove_entry(cbar, j);
    for (Index i = 0; i < d; ++i)
      if (i != j) a.C(i, j) = cj(reduced_index(i, j));
  }

  // Stationary law by a direct solve: replace one balance equation by sum(mu) = 1.
  Matrix A = a.Q.transpose();
  A.row(d - 1).setOnes();
  Vector rhs = Vector::Zero(d);
  rhs(d - 1) = 1.0;
  const Vector muSolve = A.partialPivLu().solve(rhs);

  if (d <= 8) {
    a.mu = a.muTilde / a.muTilde.sum();
    const double gap = (a.mu - muSolve).cwiseAbs().maxCoeff();
    if (!(gap <= 1e-8)) {
      std::ostringstream os;
      os << "analyze_chain: determinant and linear-solve invariant measures disagree by " << gap;
      throw Error(ErrorKind::internal, os.str());
    }
  } else {
    a.mu = muSolve;
  }

  a.muCbar = a.mu.dot(cbar);
  a.CbarDiag = a.muCbar * a.mu.cwiseInverse();
  return a;
}

AbsorptionMoments absorption_moments(const Matrix& Psub) {
  const Index n = Psub.rows();
  if (n == 0 || Psub.cols() != n) throw ConfigError("absorption_moments: matrix must be square");
  if ((Psub.array() < 0.0).any()) throw ConfigError("absorption_moments: negative entry");
  if ((Psub.rowwise().sum().array() > 1.0 + 1e-12).any())
    throw ConfigError("absorption_moments: row sum exceeds 1");

  AbsorptionMoments m;
  m.spectralRadius = Psub.eigenvalues().cwiseAbs().maxCoeff();
  if (m.spectralRadius >= 1.0 - 1e-12)
    throw StabilityError("absorption_moments: not absorbing (spectral radius " +
                         std::to_string(m.spectralRadius) + ")");
  const Matrix M = (Matrix::Identity(n, n) - Psub).partialPivLu().inverse();
  m.expectedSteps = M * Vector::Ones(n);
  m.secondMoment = (2.0 * M - Matrix::Identity(n, n)) * m.expectedSteps;
  return m;
}

AdjugateResidual adjugate_identity_check(const Matrix& P) {
  const Index d = P.rows();
  if (d < 3) throw CapabilityError("adjugate_identity_check: identity requires three distinct indices");
  const Matrix Q = Matrix::Identity(d, d) - P;
  std::vector<Matrix> adj(d);
  Vector mu(d);
  for (Index j = 0; j < d; ++j) {
    const Matrix Qj = remove_row_col(Q, j, j);
    adj[j] = adjugate(Qj);
    mu(j) = Qj.determinant();
  }
  AdjugateResidual out;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index k = 0; k < d; ++k) {
        if (i == j || j == k || i == k) continue;
        const double t1 = mu(i) * adj[j](reduced_index(i, j), reduced_index(k, j));
        const double t2 = mu(j) * adj[i](reduced_index(j, i), reduced_index(k, i));
        const double t3 = mu(k) * adj[j](reduced_index(i, j), reduced_index(i, j));
        out.residual = std::max(out.residual, std::abs(t1 + t2 - t3));
        out.scale = std::max({out.scale, std::abs(t1), std::abs(t2), std::abs(t3)});
      }
  return out;
}

}  // namespace oswitch
