#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oswitch/lattice.hpp"
#include "oswitch/model.hpp"
#include "oswitch/reflection.hpp"

namespace oswitch {

struct SolveDiagnostics {
  double membershipDefect = 0.0;          // max over nodes of (-min slack)^+
  double skorokhodDefect = 0.0;           // sum of Kinc_i (slack_i - tol)^+
  double terminalProjectionDefect = 0.0;  // max |Y(T) - g|
  double picardResidual = 0.0;
  int picardIters = 0;
  double obliqueDefect = 0.0;
  std::optional<double> decompositionDefect;
  double lipschitzY = 0.0, lipschitzZ = 0.0;
  bool shifted = false;
  Vector shift;
  std::vector<std::string> warnings;
};

/// Y[k][m][i] for k = 0..N, Z and Kinc for k = 0..N-1 (flat storage).
struct LatticeSolution {
  std::string modelName;
  int steps = 0;
  int M = 0;
  Index d = 0;
  double dt = 0.0;
  Vector x;
  int rootIndex = 0;
  std::vector<double> Yv, Zv, Kv;
  SolveDiagnostics diagnostics;

  double Y(int k, int m, Index i) const { return Yv[(static_cast<std::size_t>(k) * M + m) * d + i]; }
  double Z(int k, int m, Index i) const { return Zv[(static_cast<std::size_t>(k) * M + m) * d + i]; }
  double K(int k, int m, Index i) const { return Kv[(static_cast<std::size_t>(k) * M + m) * d + i]; }
  Vector Yvec(int k, int m) const;
  Vector root() const { return Yvec(0, rootIndex); }
};

struct SolveOptions {
  std::optional<Vector> interiorPoint;  // shift anchor for signed costs
  const ReflectionField* field = nullptr;
  int picardMax = 50;
  double picardTol = 1e-12;
  double skorokhodTol = 1e-9;
};

/// Backward induction: terminal oblique projection, quadrature expectation,
/// Picard loop for the driver, then oblique projection at every node.
LatticeSolution solve(const ControlledTransitionModel& model, const Lattice& lattice, const Driver& driver,
                      const SolveOptions& options = {});

struct RefinementRow {
  int steps = 0;
  bool refused = false;
  std::string message;
  Vector root;
  double diff = 0.0;   // sup-norm difference to the previous accepted row
  double order = 0.0;  // log2 of successive difference ratio
};

struct ConvergenceTable {
  std::vector<RefinementRow> rows;
  bool monotone = false;
  std::optional<Vector> extrapolated;
  std::vector<std::string> notes;
};

ConvergenceTable refine_and_extrapolate(const ControlledTransitionModel& model, const SdeParams& sde,
                                        const std::vector<LatticeSpec>& specs, const Driver& driver);

void write_solution_csv(std::ostream& os, const LatticeSolution& sol,
                        const std::map<std::string, std::string>& metadata);

/// Non-negative least squares min |A a - b|, a >= 0 (Lawson-Hanson).
Vector nnls(const Matrix& A, const Vector& b);

}  // namespace oswitch
