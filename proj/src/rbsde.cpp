#include "oswitch/rbsde.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "oswitch/domain.hpp"
#include "oswitch/errors.hpp"
#include "oswitch/parallel.hpp"

namespace oswitch {

Vector LatticeSolution::Yvec(int k, int m) const {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = Y(k, m, i);
  return v;
}

Vector nnls(const Matrix& A, const Vector& b) {
  const Index n = A.cols();
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-14 * (1.0 + A.cwiseAbs().maxCoeff()) * (1.0 + b.cwiseAbs().maxCoeff());
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Vector w = A.transpose() * (b - A * x);
    Index enter = -1;
    double best = tol;
    for (Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > best) {
        best = w(j);
        enter = j;
      }
    if (enter < 0) break;
    passive[enter] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<Index> P;
      for (Index j = 0; j < n; ++j)
        if (passive[j]) P.push_back(j);
      Matrix AP(A.rows(), static_cast<Index>(P.size()));
      for (std::size_t a = 0; a < P.size(); ++a) AP.col(static_cast<Index>(a)) = A.col(P[a]);
      const Vector zP = AP.completeOrthogonalDecomposition().solve(b);
      if ((zP.array() > 0.0).all()) {
        x.setZero();
        for (std::size_t a = 0; a < P.size(); ++a) x(P[a]) = zP(static_cast<Index>(a));
        break;
      }
      double alpha = 1.0;
      for (std::size_t a = 0; a < P.size(); ++a)
        if (zP(static_cast<Index>(a)) <= 0.0) {
          const double xa = x(P[a]);
          alpha = std::min(alpha, xa / (xa - zP(static_cast<Index>(a))));
        }
      for (std::size_t a = 0; a < P.size(); ++a)
        x(P[a]) += alpha * (zP(static_cast<Index>(a)) - x(P[a]));
      for (std::size_t a = 0; a < P.size(); ++a)
        if (x(P[a]) <= 1e-15) {
          x(P[a]) = 0.0;
          passive[P[a]] = false;
        }
    }
  }
  return x;
}

LatticeSolution solve(const ControlledTransitionModel& model, const Lattice& lattice, const Driver& driver,
                      const SolveOptions& options) {
  model.check();
  const Index d = model.d;
  const int N = lattice.spec.steps;
  const int M = lattice.points();
  const double dt = lattice.dt;

  const auto cert = nonemptiness_report(model);
  if (!cert.lpFeasible) throw GeometryError("solve: domain is empty");

  LatticeSolution sol;
  sol.modelName = model.name;
  sol.steps = N;
  sol.M = M;
  sol.d = d;
  sol.dt = dt;
  sol.x = lattice.x;
  sol.rootIndex = lattice.rootIndex;
  auto& diag = sol.diagnostics;

  const LipschitzEstimate lip = estimate_lipschitz(driver, lattice, d);
  diag.lipschitzY = lip.y;
  diag.lipschitzZ = lip.z;
  if (lip.y * dt >= 1.0) {
    std::ostringstream os;
    os << "solve: Picard iteration does not contract (L dt = " << lip.y * dt << "); max admissible dt is "
       << 1.0 / lip.y << ", i.e. steps > " << std::ceil(lattice.spec.T * lip.y);
    throw StabilityError(os.str());
  }
  if (driver.dependsOnZ)
    diag.warnings.push_back("driver depends on z; lattice Z carries an O(dt^{1/2}) error");

  // Signed costs: solve on the translated domain D - y0, whose costs are positive.
  ControlledTransitionModel work = model;
  Vector shift = Vector::Zero(d);
  const double cHat = model.closedFormObstacle ? 0.75 : model.min_costs().minCoeff();
  if (options.interiorPoint || !(cHat > 0.0)) {
    shift = options.interiorPoint ? *options.interiorPoint : interior_point(model);
    work = shift_to_positive_costs(shift, model);
    diag.shifted = true;
  }
  diag.shift = shift;

  sol.Yv.assign(static_cast<std::size_t>(N + 1) * M * d, 0.0);
  sol.Zv.assign(static_cast<std::size_t>(N) * M * d, 0.0);
  sol.Kv.assign(static_cast<std::size_t>(N) * M * d, 0.0);
  auto at = [&](int k, int m, Index i) { return (static_cast<std::size_t>(k) * M + m) * d + i; };

  struct NodeDiag {
    double membership = 0.0, skorokhod = 0.0, picardRes = 0.0, oblique = 0.0, terminal = 0.0;
    int picardIters = 0;
  };
  std::vector<NodeDiag> nodeDiag(M);
  auto merge = [&]() {
    for (auto& nd : nodeDiag) {
      diag.membershipDefect = std::max(diag.membershipDefect, nd.membership);
      diag.skorokhodDefect += nd.skorokhod;
      diag.picardResidual = std::max(diag.picardResidual, nd.picardRes);
      diag.picardIters = std::max(diag.picardIters, nd.picardIters);
      diag.obliqueDefect = std::max(diag.obliqueDefect, nd.oblique);
      diag.terminalProjectionDefect = std::max(diag.terminalProjectionDefect, nd.terminal);
      nd = NodeDiag{};
    }
  };
  auto project = [&](const Vector& v) {
    ObliqueProjection pr = oblique_project(v, work);
    if (!pr.converged) throw StabilityError("solve: oblique projection did not converge");
    return pr;
  };
  auto record_slack = [&](const Vector& y, const Vector* kinc, NodeDiag& nd) {
    for (Index i = 0; i < d; ++i) {
      const double slack = y(i) - obstacle(y, i, work);
      nd.membership = std::max(nd.membership, -slack);
      if (kinc) nd.skorokhod += (*kinc)(i) * std::max(0.0, slack - options.skorokhodTol);
    }
  };

  const unsigned workers = thread_count();
  parallel_for(M, workers, [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t m = b; m < e; ++m) {
      Vector g(d);
      for (Index i = 0; i < d; ++i) g(i) = driver.g(i, lattice.x(m)) - shift(i);
      const ObliqueProjection pr = project(g);
      NodeDiag& nd = nodeDiag[m];
      nd.terminal = (pr.z - g).cwiseAbs().maxCoeff();
      nd.oblique = pr.defect;
      record_slack(pr.z, nullptr, nd);
      for (Index i = 0; i < d; ++i) sol.Yv[at(N, static_cast<int>(m), i)] = pr.z(i);
    }
  });
  merge();

  for (int k = N - 1; k >= 0; --k) {
    const double t = lattice.time(k);
    parallel_for(M, workers, [&](std::size_t b, std::size_t e, unsigned) {
      for (std::size_t mm = b; mm < e; ++mm) {
        const int m = static_cast<int>(mm);
        const double x = lattice.x(m);
        NodeDiag& nd = nodeDiag[m];
        Vector E = Vector::Zero(d), Z = Vector::Zero(d);
        for (const Transition& tr : lattice.transitions[m])
          for (Index i = 0; i < d; ++i) {
            const double y = sol.Yv[at(k + 1, tr.target, i)];
            E(i) += tr.weight * y;
            Z(i) += tr.weight * y * tr.dW;
          }
        Z /= dt;
        Vector Yt(d);
        for (Index i = 0; i < d; ++i) {
          double y = E(i);
          double next = E(i) + dt * driver.f(i, t, x, y + shift(i), Z(i));
          int it = 1;
          if (driver.dependsOnY) {
            while (it < options.picardMax &&
                   std::abs(next - y) > options.picardTol * (1.0 + std::abs(next))) {
              y = next;
              next = E(i) + dt * driver.f(i, t, x, y + shift(i), Z(i));
              ++it;
            }
            nd.picardRes = std::max(nd.picardRes, std::abs(next - y));
          }
          nd.picardIters = std::max(nd.picardIters, it);
          Yt(i) = next;
        }
        const ObliqueProjection pr = project(Yt);
        const Vector Kinc = pr.z - Yt;
        nd.oblique = std::max(nd.oblique, pr.defect);
        record_slack(pr.z, &Kinc, nd);
        for (Index i = 0; i < d; ++i) {
          sol.Yv[at(k, m, i)] = pr.z(i);
          sol.Zv[at(k, m, i)] = Z(i);
          sol.Kv[at(k, m, i)] = Kinc(i);
        }
      }
    });
    merge();
  }

  for (std::size_t s = 0; s < sol.Yv.size(); ++s) sol.Yv[s] += shift(static_cast<Index>(s % d));

  if (options.field) {
    const ReflectionField& field = *options.field;
    if (field.vertexOnly || field.model.d != d) {
      diag.warnings.push_back("decomposition defect unavailable for this reflection field");
    } else {
      double worst = 0.0;
      for (int k = 0; k < N; ++k)
        for (int m = 0; m < M; ++m) {
          Vector K(d);
          for (Index i = 0; i < d; ++i) K(i) = sol.K(k, m, i);
          if (K.cwiseAbs().maxCoeff() <= 1e-14) continue;
          const Vector y = sol.Yvec(k, m);
          const ActiveCone cone = field.cone_at(y);
          if (cone.normals.empty()) {
            worst = std::max(worst, K.norm());
            continue;
          }
          const Matrix H = field.evaluate(y);
          Matrix A(d, static_cast<Index>(cone.normals.size()));
          for (std::size_t a = 0; a < cone.normals.size(); ++a) A.col(static_cast<Index>(a)) = -dt * H * cone.normals[a];
          const Vector alpha = nnls(A, K);
          worst = std::max(worst, (A * alpha - K).norm());
        }
      diag.decompositionDefect = worst;
    }
  }
  return sol;
}

ConvergenceTable refine_and_extrapolate(const ControlledTransitionModel& model, const SdeParams& sde,
                                        const std::vector<LatticeSpec>& specs, const Driver& driver) {
  if (specs.size() < 3) throw ConfigError("refine_and_extrapolate: need at least 3 resolutions");
  ConvergenceTable table;
  std::optional<std::size_t> prev;
  std::vector<double> diffs;
  bool anyRefused = false;
  for (const auto& spec : specs) {
    RefinementRow row;
    row.steps = spec.steps;
    try {
      const Lattice L = build_lattice(sde, spec);
      row.root = solve(model, L, driver).root();
    } catch (const StabilityError& e) {
      row.refused = true;
      row.message = e.what();
      anyRefused = true;
      table.rows.push_back(row);
      continue;
    }
    if (prev) {
      const RefinementRow& p = table.rows[*prev];
      row.diff = (row.root - p.root).cwiseAbs().maxCoeff();
      if (!diffs.empty() && diffs.back() > 0.0 && row.diff > 0.0)
        row.order = std::log(diffs.back() / row.diff) / std::log(static_cast<double>(row.steps) / p.steps);
      diffs.push_back(row.diff);
    }
    table.rows.push_back(row);
    prev = table.rows.size() - 1;
  }
  table.monotone = !anyRefused && diffs.size() >= 2;
  for (std::size_t i = 1; i < diffs.size(); ++i)
    if (diffs[i] > diffs[i - 1]) table.monotone = false;
  if (anyRefused) table.notes.push_back("some resolutions were refused; no extrapolation");
  if (!table.monotone) {
    table.notes.push_back("differences are not monotone; no extrapolation");
    return table;
  }
  const auto& last = table.rows.back();
  const auto& before = table.rows[table.rows.size() - 2];
  if (last.diff == 0.0) {
    table.extrapolated = last.root;
  } else if (last.order > 0.0) {
    const double r = std::pow(static_cast<double>(last.steps) / before.steps, last.order);
    table.extrapolated = last.root + (last.root - before.root) / (r - 1.0);
  } else {
    table.notes.push_back("empirical order not positive; no extrapolation");
  }
  return table;
}

void write_solution_csv(std::ostream& os, const LatticeSolution& sol,
                        const std::map<std::string, std::string>& metadata) {
  os << std::setprecision(17);
  for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << "\n";
  const auto& dg = sol.diagnostics;
  os << "# membership_defect: " << dg.membershipDefect << "\n"
     << "# skorokhod_defect: " << dg.skorokhodDefect << "\n"
     << "# terminal_projection_defect: " << dg.terminalProjectionDefect << "\n"
     << "# picard_iters: " << dg.picardIters << "\n";
  os << "k,t,m,x,i,Y,Z,Kinc\n";
  for (int k = 0; k <= sol.steps; ++k)
    for (int m = 0; m < sol.M; ++m)
      for (Index i = 0; i < sol.d; ++i) {
        os << k << ',' << k * sol.dt << ',' << m << ',' << sol.x(m) << ',' << i << ',' << sol.Y(k, m, i) << ',';
        if (k < sol.steps) os << sol.Z(k, m, i) << ',' << sol.K(k, m, i);
        else os << ',';
        os << '\n';
      }
}

}  // namespace oswitch
