#pragma once

#include "oswitch/linalg.hpp"

namespace oswitch {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense two-phase simplex with Bland's rule for
///   minimise c^T x  subject to  A x <= b,  x free.
/// Free variables are split as x = x+ - x-. Intended for small systems.
LpResult solve_lp(const Vector& c, const Matrix& A, const Vector& b, int maxIterations = 50000);

}  // namespace oswitch
