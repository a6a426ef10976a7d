#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oswitch/linalg.hpp"

namespace oswitch {

/// dX = b(X) dt + sigma(X) dW with affine coefficients.
struct SdeParams {
  double b0 = 0.0, b1 = 0.0;      // b(x) = b0 + b1 x
  double sig0 = 1.0, sig1 = 0.0;  // sigma(x) = sig0 + sig1 x
  double x0 = 0.0;

  double drift(double x) const { return b0 + b1 * x; }
  double vol(double x) const { return sig0 + sig1 * x; }
};

enum class Quadrature { gaussian, trinomial };
const char* to_string(Quadrature q);

struct LatticeSpec {
  double T = 1.0;
  int steps = 20;
  Quadrature mode = Quadrature::trinomial;
  double coverage = 5.0;  // half-width of the grid in units of sigma(x0) sqrt(T)
  double spacing = 0.0;   // 0: sigma sqrt(3 dt) (trinomial) or sigma sqrt(dt) / 2 (gaussian)
  int points = 0;         // 0: derived from coverage; otherwise odd node count
};

struct Transition {
  int target = 0;
  double weight = 0.0;
  double dW = 0.0;  // (x' - x - b dt) / sigma(x)
};

/// Symmetric grid around x0 with one transition list per node (time-homogeneous).
struct Lattice {
  LatticeSpec spec;
  SdeParams sde;
  double dt = 0.0;
  double spacing = 0.0;
  Vector x;
  int rootIndex = 0;
  std::vector<std::vector<Transition>> transitions;

  int points() const { return static_cast<int>(x.size()); }
  double time(int k) const { return k * dt; }
};

/// Euler-step conditional law N(x + b dt, sigma^2 dt) integrated over grid cells
/// (gaussian) or a matched-moment three-point law (trinomial).
Lattice build_lattice(const SdeParams& sde, const LatticeSpec& spec);

/// Per-mode driver f^i(t, x, y_i, z_i) and terminal g^i(x).
struct Driver {
  std::function<double(Index, double, double, double, double)> f;
  std::function<double(Index, double)> g;
  bool dependsOnY = false;
  bool dependsOnZ = false;
  std::string description;
};

/// f^i = base^i(t, x) + ay_i y + az_i z and terminal g^i(x).
Driver make_affine_driver(std::vector<std::function<double(double, double)>> base, Vector ay, Vector az,
                          std::vector<std::function<double(double)>> terminal);

struct LipschitzEstimate {
  double y = 0.0;
  double z = 0.0;
};

/// Finite-difference Lipschitz constants of f in (y, z) over lattice nodes.
LipschitzEstimate estimate_lipschitz(const Driver& driver, const Lattice& lattice, Index d);

}  // namespace oswitch
