#pragma once

#include <string>
#include <vector>

#include "oswitch/linalg.hpp"

namespace oswitch {

/// Finite control grid with one stochastic matrix and one mean-cost vector per
/// control. `closedFormObstacle` marks the cyclic quadratic-cost family
///   P^u rows (0,u,1-u), (1-u,0,u), (u,1-u,0),  cbar^u_i = 1 - u(1-u),  u in [0,1],
/// whose obstacle is maximised exactly over [0,1] instead of over the grid.
struct ControlledTransitionModel {
  std::string name;
  Index d = 0;
  std::vector<double> controls;
  std::vector<Matrix> P;
  std::vector<Vector> cbar;
  bool closedFormObstacle = false;

  std::size_t control_count() const { return controls.size(); }
  /// One control and no closed-form continuum.
  bool uncontrolled() const { return controls.size() == 1 && !closedFormObstacle; }
  /// True when every control shares the same transition matrix.
  bool common_transition() const;
  /// Row-wise minimum over controls of the mean costs.
  Vector min_costs() const;
  /// Throws ConfigError unless the family is structurally sound, validates as
  /// stochastic, and the controls are strictly increasing.
  void check() const;
};

/// Row `i` of P^u and cbar^u_i for a control value of the continuum family.
Vector quadratic_cyclic_row(double u, Index i);
double quadratic_cyclic_cost(double u);

/// Classical switching embedded as controlled randomisation: controls 1..d-1,
/// P^u_{i,j} = 1 iff j - i = u mod d, cbar^u_i = c_{i, i+u mod d}.
/// Rejects a nonzero diagonal.
ControlledTransitionModel classical_embedding(const Matrix& costMatrix);

namespace builtin {

/// Classical switching, d = 3, unit costs.
ControlledTransitionModel example1();
/// Single control, off-diagonal 1/2, costs c.
ControlledTransitionModel example2(double c = 1.0);
/// Quadratic-cost controlled randomisation on a uniform grid of [0,1].
ControlledTransitionModel example3(int gridPoints = 101, bool closedForm = true);
/// Two controls sharing the off-diagonal-1/2 chain, costs (-0.5,1.2,0.7) and (1.5,0.2,0.2).
ControlledTransitionModel signed_two_control();
/// P_{i,j} = 1/(d-1) off the diagonal, uniform cost c.
ControlledTransitionModel symmetric(int d, double c = 1.0);
/// P = [[0,p,1-p],[q,0,1-q],[r,1-r,0]] with mean costs c.
ControlledTransitionModel dim3(double p, double q, double r, const Vector& c);
/// The 4-state chain with entries sqrt(3)/2, 1-sqrt(3)/2, sqrt(3)-1, 1/3; unit costs.
ControlledTransitionModel dim4();
/// Single control with arbitrary data.
ControlledTransitionModel uncontrolled(const Matrix& P, const Vector& c, std::string name = "custom");

}  // namespace builtin

}  // namespace oswitch
