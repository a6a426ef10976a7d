#pragma once

#include <span>
#include <string>
#include <vector>

#include "oswitch/linalg.hpp"

namespace oswitch {

struct RowDefect {
  std::size_t control;
  Index row;
  double sum;
};

struct EntryRef {
  std::size_t control;
  Index row;
  Index col;
};

/// Outcome of validate_model. `valid` is false on any row-sum defect, negative
/// entry or unit diagonal (P^u_{i,i} = 1).
struct ValidationReport {
  bool valid = true;
  std::vector<RowDefect> rowDefects;
  std::vector<EntryRef> negativeEntries;
  std::vector<EntryRef> unitDiagonal;
  double cHat = 0.0;    // min over (i,u) of cbar_i^u
  double cCheck = 0.0;  // max over (i,u) of cbar_i^u
  std::vector<std::string> issues;
};

/// Checks a control-indexed family of transition matrices and mean costs.
/// Throws ConfigError on structural problems (empty family, mismatched sizes).
ValidationReport validate_model(std::span<const Matrix> P, std::span<const Vector> cbar);

/// Strong connectivity of the graph {(i,j) : P_{i,j} > 0}. Structural zeros are
/// exact zeros; there is no tolerance.
bool irreducible(const Matrix& P);

/// Everything the domain geometry needs from one irreducible chain.
struct ChainAnalysis {
  Matrix Q;                 // I - P
  Vector mu;                // invariant probability
  Vector muTilde;           // det Q^{(i,i)}
  Matrix C;                 // excursion costs, C_{jj} = 0
  Vector CbarDiag;          // round-trip costs mu.cbar / mu_j
  double muCbar = 0.0;
  Vector conditionNumbers;  // cond_1 estimate of Q^{(j,j)} per j
  std::vector<std::string> warnings;
};

/// Invariant measure, excursion costs and round-trip costs of an irreducible
/// chain with mean costs `cbar`. Throws GeometryError when P is reducible.
ChainAnalysis analyze_chain(const Matrix& P, const Vector& cbar);

/// (Q^{(j,j)})^{-1}, the fundamental matrix of the chain killed at j.
Matrix killed_fundamental_matrix(const Matrix& P, Index j);

struct AbsorptionMoments {
  Vector expectedSteps;  // E[N] per transient state
  Vector secondMoment;   // E[N^2]
  double spectralRadius = 0.0;
};

/// Moments of the absorption time N for a substochastic matrix over transient
/// states. Throws StabilityError when the spectral radius is >= 1 - 1e-12.
AbsorptionMoments absorption_moments(const Matrix& Psub);

struct AdjugateResidual {
  double residual = 0.0;
  double scale = 0.0;
};

/// max over distinct (i,j,k) of
///   |mu_i A^j_{i,k} + mu_j A^i_{j,k} - mu_k A^j_{i,i}|
/// with A^j = adj(Q^{(j,j)}) and mu = muTilde (the identity is homogeneous in mu).
/// Requires d >= 3.
AdjugateResidual adjugate_identity_check(const Matrix& P);

}  // namespace oswitch
