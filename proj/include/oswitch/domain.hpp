#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oswitch/markov.hpp"
#include "oswitch/model.hpp"

namespace oswitch {

/// Constraint normal^T y <= offset, i.e. y_i >= P^u_i y - cbar^u_i with
/// normal = row i of -(I - P^u).
struct HalfSpace {
  Vector normal;
  double offset = 0.0;
  std::size_t control = 0;
  Index row = 0;
};

std::vector<HalfSpace> half_spaces(const ControlledTransitionModel& model);

/// A maximiser of the obstacle of row i: the control value, its grid index
/// (npos for a continuum maximiser), the transition row and the mean cost.
struct ActiveControl {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  double u = 0.0;
  std::size_t index = npos;
  Vector row;
  double cost = 0.0;
  double value = 0.0;
};

/// max over controls of P^u_i y - cbar^u_i.
double obstacle(const Vector& y, Index i, const ControlledTransitionModel& model);

/// Maximiser of the obstacle; ties resolve to the smallest control.
ActiveControl obstacle_argmax(const Vector& y, Index i, const ControlledTransitionModel& model);

struct MembershipResult {
  bool member = false;
  double slack = 0.0;  // min_i (y_i - obstacle_i(y))
  Index worstRow = 0;
};

MembershipResult membership(const Vector& y, const ControlledTransitionModel& model, double tol = 1e-9);

enum class Verdict { empty, nonempty_empty_interior, nonempty_interior };
const char* to_string(Verdict v);

struct ControlChainSummary {
  bool irreducible = false;
  double muCbar = 0.0;
  double pairMin = 0.0;  // min_{i != j} C_ij + C_ji
  double pairMax = 0.0;  // max_{i != j} C_ij + C_ji
};

struct NonEmptinessCertificate {
  // LP: maximise s subject to -Q^u y + s 1 <= cbar^u, y_d = 0, s <= 1.
  double lpSlack = 0.0;
  bool lpFeasible = false;
  bool lpStrict = false;
  Vector anchor;  // LP maximiser, slice representative

  bool markovAvailable = false;
  std::vector<ControlChainSummary> perControl;
  std::optional<Matrix> Chat;  // min_u C^u
  double ChatPairMin = 0.0;

  // Only when all controls share one transition matrix: mu . min_u cbar^u.
  std::optional<double> muChat;
  std::optional<Vector> mu;

  // Uncontrolled case: the four equivalent conditions.
  bool uncontrolled = false;
  bool condLp = false, condSomePair = false, condMuCbar = false, condAllPairs = false;
  bool strictLp = false, strictSomePair = false, strictMuCbar = false, strictAllPairs = false;
  bool conditionsAgree = true;
  std::optional<bool> triangleOk;

  Verdict verdict = Verdict::empty;
  std::vector<std::string> notes;
};

NonEmptinessCertificate nonemptiness_report(const ControlledTransitionModel& model);

/// Interior point found by the slack-maximising LP; throws GeometryError when the
/// interior is empty.
Vector interior_point(const ControlledTransitionModel& model);

/// Vertices -theta_{.,j} of the slice (as columns), uncontrolled case.
Matrix slice_vertices(const ControlledTransitionModel& model);
Matrix slice_vertices(const ChainAnalysis& analysis);

struct ConeInfo {
  Vector lambda;
  std::vector<Index> active;      // E_y = {j : lambda_j > activeTol}
  std::vector<Index> inactive;
  std::vector<Vector> generators; // n_j = -Q_{j,.}^T for j not in E_y
};

/// Barycentric coordinates of y (translated to the slice) over the vertex
/// columns and the normal-cone generators. Throws GeometryError when some
/// lambda_j < -tol.
ConeInfo barycentric_and_normal_cone(const Vector& y, const Matrix& vertices, const Matrix& Q,
                                     double activeTol = 1e-8, double tol = 1e-9);

/// Euclidean projection onto D (control-grid half-spaces): Dykstra followed by
/// an active-set polish.
Vector euclidean_project(const Vector& y, const ControlledTransitionModel& model);
Vector euclidean_project(const Vector& y, const std::vector<HalfSpace>& hs);

struct ObliqueProjection {
  Vector z;
  int iterations = 0;
  bool converged = false;
  double defect = 0.0;  // max_i (obstacle_i(z) - z_i)^+ plus fixed-point residual
};

/// Least z >= y with z in D. The components that move are exactly those whose
/// constraint is active at z.
ObliqueProjection oblique_project(const Vector& y, const ControlledTransitionModel& model);

/// Costs cbar~^u_i = y0_i - P^u_i y0 + cbar^u_i; the new domain is D - y0.
ControlledTransitionModel shift_to_positive_costs(const Vector& y0, const ControlledTransitionModel& model);

struct TriangleReport {
  bool triangleOk = true;
  double minTriangleSlack = 0.0;  // min over (i,j,k) of C_ji + C_ik - C_jk
  Index worstJ = 0, worstI = 0, worstK = 0;
  bool roundTripsOk = true;
  double minRoundTrip = 0.0;  // over cycles of 2..d distinct states
};

TriangleReport triangle_check(const ChainAnalysis& analysis);

/// Boundary of the slice for d = 3 as an ordered point list (third coordinate 0).
/// Uncontrolled models give their vertices; controlled ones are traced along
/// `resolution` rays from an interior anchor.
std::vector<Vector> emit_slice_polygon(const ControlledTransitionModel& model, int resolution);

/// Exact corners of the slice polygon of a d = 3 grid model, ordered by angle.
std::vector<Vector> slice_polygon_corners(const ControlledTransitionModel& model, double tol = 1e-9);

}  // namespace oswitch
