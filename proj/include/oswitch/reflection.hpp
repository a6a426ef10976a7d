#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oswitch/domain.hpp"

namespace oswitch {

enum class Construction { markovian, dim3, symmetric, controlled_dim3 };
const char* to_string(Construction c);

enum class Copositivity { strict, not_strict, inconclusive };
const char* to_string(Copositivity c);

struct CopositivityResult {
  Copositivity status = Copositivity::inconclusive;
  Vector witness;         // x >= 0 with max entry 1 (minimiser over the simplex)
  double minValue = 0.0;  // witness^T M witness
  std::string method;
};

/// Strict copositivity of M (through its symmetric part). Exact face
/// enumeration up to size 6; above that only sufficient conditions and sampling.
CopositivityResult copositivity_check(const Matrix& M, std::uint64_t seed = 1);

/// Cone data at a point: constraint indices that are active and their normals.
struct ActiveCone {
  std::vector<Index> active;
  std::vector<Vector> normals;
};

/// Piecewise-linear matrix field over the slice, extended along (1,...,1) and
/// by Euclidean projection outside D. Continuous, not globally C^1.
struct ReflectionField {
  Construction construction = Construction::markovian;
  ControlledTransitionModel model;
  Matrix vertices;                    // slice vertices as columns; vertex j leaves constraint j inactive
  std::vector<Matrix> vertexMatrices; // H at each vertex
  Matrix Q;                           // I - P (uncontrolled constructions)
  std::vector<HalfSpace> halfSpaces;
  bool vertexOnly = false;            // controlled construction: no edge interpolation
  bool symmetricExpected = false;
  std::vector<std::string> notes;

  Matrix evaluate(const Vector& y) const;
  /// Barycentric weights of the slice representative (after projection if outside D).
  Vector weights(const Vector& y) const;
  ActiveCone cone_at(const Vector& y) const;
};

/// H(y^j) = I^j ((Q^{(j,j)})^T)^{-1} P^j: maps n_i to -e_i for every i != j.
Matrix markovian_vertex_matrix(const Matrix& Q, Index j);

ReflectionField build_H_markovian(const ControlledTransitionModel& model);
ReflectionField build_H_dim3(double p, double q, double r, const Vector& costs);
ReflectionField build_H_symmetric(int d);
ReflectionField build_H_controlled_dim3_vertices();

/// Closed forms of the symmetric family with a = 2.
Matrix symmetric_family_last_vertex(int d, double a = 2.0);
double symmetric_family_det(int d, double a = 2.0);
double symmetric_family_trace(int d, double a = 2.0);

struct HCertificate {
  bool passed = false;
  Construction construction = Construction::markovian;
  std::string model;
  double etaMin = 0.0;
  double coneMaxDefect = 0.0;
  double symmetryDefect = 0.0;
  double boundMax = 0.0;
  double spectralMin = 0.0;
  double spectralMax = 0.0;
  double L = 0.0;  // max(lambda_max, 1/lambda_min) for symmetric fields, else the largest singular value
  double translationDefect = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> failures;

  std::string to_record() const;
};

/// Stratified boundary sampling (vertices, then faces of every dimension) with
/// random normal-cone vectors per sample.
HCertificate verify_H(const ReflectionField& field, int sampleCount, std::uint64_t seed);

struct Dim4Witness {
  Matrix P;
  Vector n1, n2, n3;
  Matrix H;
  Vector v;
  double vHv = 0.0;
  bool irreducible = false;
  bool valid = false;
  CopositivityResult copositivity;  // of Q^{(4,4)}
};

Dim4Witness dim4_counterexample();

}  // namespace oswitch
