#include "oswitch/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "oswitch/errors.hpp"
#include "oswitch/lp.hpp"

namespace oswitch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void require_dim(const Vector& y, const ControlledTransitionModel& model, const char* who) {
  if (y.size() != model.d)
    throw ConfigError(std::string(who) + ": point has " + std::to_string(y.size()) +
                      " entries, model has d = " + std::to_string(model.d));
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::empty: return "empty";
    case Verdict::nonempty_empty_interior: return "nonempty-empty-interior";
    case Verdict::nonempty_interior: return "nonempty-interior";
  }
  return "?";
}

std::vector<HalfSpace> half_spaces(const ControlledTransitionModel& model) {
  std::vector<HalfSpace> hs;
  hs.reserve(model.control_count() * model.d);
  for (std::size_t u = 0; u < model.control_count(); ++u)
    for (Index i = 0; i < model.d; ++i) {
      HalfSpace h;
      h.normal = model.P[u].row(i).transpose();
      h.normal(i) -= 1.0;
      h.offset = model.cbar[u](i);
      h.control = u;
      h.row = i;
      hs.push_back(std::move(h));
    }
  return hs;
}

ActiveControl obstacle_argmax(const Vector& y, Index i, const ControlledTransitionModel& model) {
  ActiveControl best;
  if (model.closedFormObstacle) {
    const Index i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    const double a = 1.0 + y(i1) - y(i2);
    const double u = std::clamp(a / 2.0, 0.0, 1.0);
    best.u = u;
    best.row = quadratic_cyclic_row(u, i);
    best.cost = quadratic_cyclic_cost(u);
    best.value = -u * u + u * a + y(i2) - 1.0;
    return best;
  }
  double top = -kInf;
  for (std::size_t u = 0; u < model.control_count(); ++u)
    top = std::max(top, model.P[u].row(i).dot(y) - model.cbar[u](i));
  // Smallest control whose value reaches the maximum up to rounding.
  const double tol = 1e-13 * (1.0 + std::abs(top) + sup_norm(y));
  for (std::size_t u = 0; u < model.control_count(); ++u) {
    const double v = model.P[u].row(i).dot(y) - model.cbar[u](i);
    if (v >= top - tol) {
      best.u = model.controls[u];
      best.index = u;
      best.row = model.P[u].row(i).transpose();
      best.cost = model.cbar[u](i);
      best.value = v;
      break;
    }
  }
  return best;
}

double obstacle(const Vector& y, Index i, const ControlledTransitionModel& model) {
  if (model.closedFormObstacle) return obstacle_argmax(y, i, model).value;
  double top = -kInf;
  for (std::size_t u = 0; u < model.control_count(); ++u)
    top = std::max(top, model.P[u].row(i).dot(y) - model.cbar[u](i));
  return top;
}

MembershipResult membership(const Vector& y, const ControlledTransitionModel& model, double tol) {
  require_dim(y, model, "membership");
  MembershipResult r;
  r.slack = kInf;
  for (Index i = 0; i < model.d; ++i) {
    const double s = y(i) - obstacle(y, i, model);
    if (s < r.slack) {
      r.slack = s;
      r.worstRow = i;
    }
  }
  r.member = r.slack >= -tol;
  return r;
}

namespace {

struct SlackLp {
  double s = 0.0;
  Vector y;
};

SlackLp max_uniform_slack(const ControlledTransitionModel& model) {
  const Index d = model.d;
  const auto hs = half_spaces(model);
  const Index m = static_cast<Index>(hs.size());
  Matrix A = Matrix::Zero(m + 1, d);
  Vector b(m + 1);
  for (Index k = 0; k < m; ++k) {
    A.block(k, 0, 1, d - 1) = hs[k].normal.head(d - 1).transpose();
    A(k, d - 1) = 1.0;
    b(k) = hs[k].offset;
  }
  A(m, d - 1) = 1.0;
  b(m) = 1.0;
  Vector c = Vector::Zero(d);
  c(d - 1) = -1.0;
  const LpResult res = solve_lp(c, A, b);
  if (res.status != LpStatus::optimal)
    throw Error(ErrorKind::internal,
                std::string("uniform-slack LP did not reach optimality: ") + to_string(res.status));
  SlackLp out;
  out.s = res.x(d - 1);
  out.y = Vector::Zero(d);
  out.y.head(d - 1) = res.x.head(d - 1);
  return out;
}

}  // namespace

NonEmptinessCertificate nonemptiness_report(const ControlledTransitionModel& model) {
  model.check();
  NonEmptinessCertificate cert;
  const Index d = model.d;

  const SlackLp lp = max_uniform_slack(model);
  cert.lpSlack = lp.s;
  cert.lpFeasible = lp.s >= -1e-12;
  cert.lpStrict = lp.s > 1e-12;
  cert.anchor = lp.y;
  if (model.closedFormObstacle)
    cert.notes.push_back("LP runs on the control grid, an outer approximation of the continuum domain");

  cert.markovAvailable = true;
  std::vector<ChainAnalysis> analyses;
  for (std::size_t u = 0; u < model.control_count(); ++u) {
    ControlChainSummary s;
    s.irreducible = irreducible(model.P[u]);
    if (s.irreducible) {
      ChainAnalysis a = analyze_chain(model.P[u], model.cbar[u]);
      s.muCbar = a.muCbar;
      s.pairMin = kInf;
      s.pairMax = -kInf;
      for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
          const double v = a.C(i, j) + a.C(j, i);
          s.pairMin = std::min(s.pairMin, v);
          s.pairMax = std::max(s.pairMax, v);
        }
      analyses.push_back(std::move(a));
    } else {
      cert.markovAvailable = false;
      cert.notes.push_back("control " + std::to_string(u) +
                           " is reducible; Markov-chain conditions unavailable");
    }
    cert.perControl.push_back(s);
  }

  if (cert.markovAvailable) {
    Matrix Chat = analyses[0].C;
    for (std::size_t u = 1; u < analyses.size(); ++u) Chat = Chat.cwiseMin(analyses[u].C);
    cert.ChatPairMin = kInf;
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j) cert.ChatPairMin = std::min(cert.ChatPairMin, Chat(i, j) + Chat(j, i));
    cert.Chat = Chat;
    if (model.common_transition() && !model.closedFormObstacle) {
      cert.mu = analyses[0].mu;
      cert.muChat = analyses[0].mu.dot(model.min_costs());
    }
  }

  cert.verdict = cert.lpStrict ? Verdict::nonempty_interior
                               : (cert.lpFeasible ? Verdict::nonempty_empty_interior : Verdict::empty);

  cert.uncontrolled = model.uncontrolled();
  if (cert.uncontrolled && cert.markovAvailable) {
    constexpr double tol = 1e-12;
    const auto& s = cert.perControl[0];
    cert.condLp = cert.lpFeasible;
    cert.condSomePair = s.pairMax >= -tol;
    cert.condMuCbar = s.muCbar >= -tol;
    cert.condAllPairs = s.pairMin >= -tol;
    cert.strictLp = cert.lpStrict;
    cert.strictSomePair = s.pairMax > tol;
    cert.strictMuCbar = s.muCbar > tol;
    cert.strictAllPairs = s.pairMin > tol;
    cert.conditionsAgree =
        cert.condLp == cert.condSomePair && cert.condLp == cert.condMuCbar &&
        cert.condLp == cert.condAllPairs && cert.strictLp == cert.strictSomePair &&
        cert.strictLp == cert.strictMuCbar && cert.strictLp == cert.strictAllPairs;
    cert.triangleOk = triangle_check(analyses[0]).triangleOk;
    if (!cert.conditionsAgree) cert.notes.push_back("equivalent conditions disagree (boundary case?)");
  }
  return cert;
}

Vector interior_point(const ControlledTransitionModel& model) {
  const SlackLp lp = max_uniform_slack(model);
  if (!(lp.s > 1e-12)) {
    std::ostringstream os;
    os << "domain has empty interior (max uniform slack " << lp.s << ")";
    throw GeometryError(os.str());
  }
  return lp.y;
}

Matrix slice_vertices(const ChainAnalysis& a) {
  const Index d = a.C.rows();
  if (!(a.muCbar > 0.0)) throw GeometryError("interior empty; vertex characterization unavailable");
  Matrix V(d, d);
  for (Index j = 0; j < d; ++j) V.col(j) = -(a.C.col(j).array() - a.C(d - 1, j)).matrix();
  Matrix diffs(d, d - 1);
  for (Index j = 1; j < d; ++j) diffs.col(j - 1) = V.col(j) - V.col(0);
  Eigen::FullPivLU<Matrix> lu(diffs);
  lu.setThreshold(1e-10);
  if (lu.rank() != d - 1) throw GeometryError("slice vertices are affinely dependent");
  return V;
}

Matrix slice_vertices(const ControlledTransitionModel& model) {
  if (!model.uncontrolled())
    throw CapabilityError("slice_vertices: vertex formula needs an uncontrolled model");
  model.check();
  return slice_vertices(analyze_chain(model.P[0], model.cbar[0]));
}

ConeInfo barycentric_and_normal_cone(const Vector& y, const Matrix& vertices, const Matrix& Q,
                                     double activeTol, double tol) {
  const Index d = vertices.rows();
  if (y.size() != d) throw ConfigError("barycentric_and_normal_cone: dimension mismatch");
  const Vector ys = slice_representative(y);
  Matrix M(d, d);
  Vector rhs(d);
  M.topRows(d - 1) = vertices.topRows(d - 1);
  M.row(d - 1).setOnes();
  rhs.head(d - 1) = ys.head(d - 1);
  rhs(d - 1) = 1.0;
  ConeInfo info;
  info.lambda = M.partialPivLu().solve(rhs);
  for (Index j = 0; j < d; ++j) {
    if (info.lambda(j) < -tol) {
      std::ostringstream os;
      os << "point outside slice (barycentric coordinate " << j << " = " << info.lambda(j) << ")";
      throw GeometryError(os.str());
    }
    if (info.lambda(j) > activeTol) {
      info.active.push_back(j);
    } else {
      info.inactive.push_back(j);
      info.generators.push_back(-Q.row(j).transpose());
    }
  }
  return info;
}

Vector euclidean_project(const Vector& y, const std::vector<HalfSpace>& hs) {
  const Index d = y.size();
  const double shift = y(d - 1);
  const Vector ys = slice_representative(y);
  const std::size_t m = hs.size();
  const double scale = 1.0 + sup_norm(ys);

  Vector x = ys;
  std::vector<Vector> incr(m, Vector::Zero(d));
  for (int round = 0; round < 10000; ++round) {
    double moved = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const Vector z = x + incr[k];
      const double viol = hs[k].normal.dot(z) - hs[k].offset;
      Vector zp = z;
      if (viol > 0.0) zp -= (viol / hs[k].normal.squaredNorm()) * hs[k].normal;
      incr[k] = z - zp;
      moved = std::max(moved, sup_norm(zp - x));
      x = zp;
    }
    if (moved < 1e-10 * scale) break;
  }

  // Polish on the constraints that look active at the Dykstra iterate.
  std::vector<std::size_t> act;
  for (std::size_t k = 0; k < m; ++k)
    if (hs[k].offset - hs[k].normal.dot(x) < 1e-7 * scale) act.push_back(k);
  Vector best = x;
  if (!act.empty()) {
    Matrix N(static_cast<Index>(act.size()), d);
    Vector off(static_cast<Index>(act.size()));
    for (std::size_t a = 0; a < act.size(); ++a) {
      N.row(static_cast<Index>(a)) = hs[act[a]].normal.transpose();
      off(static_cast<Index>(a)) = hs[act[a]].offset;
    }
    const Matrix G = N * N.transpose();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(G);
    cod.setThreshold(1e-12);
    const Vector w = cod.solve(N * ys - off);
    const Vector z = ys - N.transpose() * w;
    bool ok = (w.array() >= -1e-10).all() && sup_norm(z - x) < 1e-6 * scale;
    for (std::size_t k = 0; ok && k < m; ++k)
      if (hs[k].normal.dot(z) - hs[k].offset > 1e-12 * scale) ok = false;
    if (ok) best = z;
  }
  return (best.array() + shift).matrix();
}

Vector euclidean_project(const Vector& y, const ControlledTransitionModel& model) {
  require_dim(y, model, "euclidean_project");
  const auto cert = nonemptiness_report(model);
  if (!cert.lpFeasible) throw GeometryError("euclidean_project: domain is empty");
  return euclidean_project(y, half_spaces(model));
}

ObliqueProjection oblique_project(const Vector& y, const ControlledTransitionModel& model) {
  require_dim(y, model, "oblique_project");
  const Index d = model.d;
  const double scale = 1.0 + sup_norm(y);
  const double eps = 1e-12 * scale;
  const int cap = std::max<int>(static_cast<int>(d * d), 50);

  // Policy iteration on z_i = max(y_i, max_u P^u_i z - cbar^u_i), starting from
  // "keep y" everywhere. Each policy is a linear system; values increase
  // monotonically to the least fixed point.
  std::vector<bool> moves(d, false);
  std::vector<Vector> rows(d);
  std::vector<double> costs(d, 0.0);

  ObliqueProjection out;
  out.z = y;
  for (int it = 0; it <= cap; ++it) {
    bool changed = false;
    for (Index i = 0; i < d; ++i) {
      const ActiveControl ac = obstacle_argmax(out.z, i, model);
      const double current = moves[i] ? rows[i].dot(out.z) - costs[i] : y(i);
      const double top = std::max(y(i), ac.value);
      if (current >= top - eps) continue;
      changed = true;
      if (ac.value > y(i)) {
        moves[i] = true;
        rows[i] = ac.row;
        costs[i] = ac.cost;
      } else {
        moves[i] = false;
      }
    }
    if (!changed) {
      out.converged = true;
      break;
    }
    if (it == cap) break;
    ++out.iterations;
    Matrix A = Matrix::Identity(d, d);
    Vector rhs = y;
    for (Index i = 0; i < d; ++i)
      if (moves[i]) {
        A.row(i) -= rows[i].transpose();
        rhs(i) = -costs[i];
      }
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible())
      throw StabilityError(
          "oblique_project: singular policy system; the domain is empty or costs are not positive");
    const Vector z = lu.solve(rhs);
    if (!z.allFinite() || sup_norm(z) > 1e12 * scale)
      throw StabilityError("oblique_project: diverging iterate; the domain is empty or costs are not positive");
    out.z = z;
  }

  double defect = 0.0;
  for (Index i = 0; i < d; ++i) {
    defect = std::max(defect, obstacle(out.z, i, model) - out.z(i));
    defect = std::max(defect, y(i) - out.z(i));
  }
  out.defect = std::max(defect, 0.0);
  return out;
}

ControlledTransitionModel shift_to_positive_costs(const Vector& y0, const ControlledTransitionModel& model) {
  require_dim(y0, model, "shift_to_positive_costs");
  if (model.closedFormObstacle)
    throw CapabilityError("shift_to_positive_costs: closed-form obstacle cannot be shifted; use the grid model");
  ControlledTransitionModel out = model;
  out.name = model.name + "-shifted";
  for (std::size_t u = 0; u < model.control_count(); ++u) {
    out.cbar[u] = y0 - model.P[u] * y0 + model.cbar[u];
    for (Index i = 0; i < model.d; ++i)
      if (!(out.cbar[u](i) > 0.0)) {
        std::ostringstream os;
        os << "shift_to_positive_costs: y0 is not strictly interior (control " << u << ", row " << i
           << ", slack " << out.cbar[u](i) << ")";
        throw GeometryError(os.str());
      }
  }
  return out;
}

TriangleReport triangle_check(const ChainAnalysis& a) {
  const Index d = a.C.rows();
  const Matrix& C = a.C;
  TriangleReport r;
  r.minTriangleSlack = kInf;
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i)
      for (Index k = 0; k < d; ++k) {
        if (i == j || i == k) continue;
        const double slack = C(j, i) + C(i, k) - C(j, k);
        if (slack < r.minTriangleSlack) {
          r.minTriangleSlack = slack;
          r.worstJ = j;
          r.worstI = i;
          r.worstK = k;
        }
      }
  r.triangleOk = r.minTriangleSlack >= -1e-9;

  // Cycles through distinct states, each enumerated once from its smallest member.
  const Index maxLen = d <= 8 ? d : 3;
  r.minRoundTrip = kInf;
  std::vector<Index> path;
  std::vector<bool> used(d, false);
  std::function<void(double)> extend = [&](double cost) {
    const Index last = path.back();
    if (path.size() >= 2) r.minRoundTrip = std::min(r.minRoundTrip, cost + C(last, path.front()));
    if (static_cast<Index>(path.size()) == maxLen) return;
    for (Index nxt = path.front() + 1; nxt < d; ++nxt) {
      if (used[nxt]) continue;
      used[nxt] = true;
      path.push_back(nxt);
      extend(cost + C(last, nxt));
      path.pop_back();
      used[nxt] = false;
    }
  };
  for (Index s = 0; s < d; ++s) {
    path = {s};
    used.assign(d, false);
    used[s] = true;
    extend(0.0);
  }
  r.roundTripsOk = r.minRoundTrip >= -1e-9;
  return r;
}

namespace {

std::vector<Vector> order_by_angle(std::vector<Vector> pts) {
  if (pts.empty()) return pts;
  Vector c = Vector::Zero(pts[0].size());
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Vector& a, const Vector& b) {
    return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
  });
  return pts;
}

}  // namespace

std::vector<Vector> emit_slice_polygon(const ControlledTransitionModel& model, int resolution) {
  if (resolution < 3) throw ConfigError("emit_slice_polygon: resolution must be >= 3");
  const auto cert = nonemptiness_report(model);
  if (!cert.lpStrict) throw GeometryError("emit_slice_polygon: domain has empty interior");

  if (model.uncontrolled()) {
    const Matrix V = slice_vertices(model);
    std::vector<Vector> pts;
    for (Index j = 0; j < V.cols(); ++j) pts.push_back(V.col(j));
    return model.d == 3 ? order_by_angle(pts) : pts;
  }
  if (model.d != 3) throw CapabilityError("emit_slice_polygon: boundary tracing needs d = 3");

  Vector anchor = cert.anchor;
  if (!(membership(anchor, model, 0.0).slack > 0.0))
    throw GeometryError("emit_slice_polygon: LP anchor is not interior for the exact obstacle");

  std::vector<Vector> pts;
  pts.reserve(resolution);
  for (int k = 0; k < resolution; ++k) {
    const double th = 2.0 * std::numbers::pi * k / resolution;
    Vector dir = Vector::Zero(3);
    dir(0) = std::cos(th);
    dir(1) = std::sin(th);
    auto inside = [&](double t) { return membership(anchor + t * dir, model, 0.0).member; };
    double lo = 0.0, hi = 1.0;
    while (inside(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e9) throw GeometryError("emit_slice_polygon: slice appears unbounded");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (inside(mid) ? lo : hi) = mid;
    }
    pts.push_back(anchor + lo * dir);
  }
  return pts;
}

std::vector<Vector> slice_polygon_corners(const ControlledTransitionModel& model, double tol) {
  if (model.d != 3) throw CapabilityError("slice_polygon_corners: needs d = 3");
  if (model.closedFormObstacle)
    throw CapabilityError("slice_polygon_corners: continuum obstacle has curved edges");
  const auto hs = half_spaces(model);
  std::vector<Vector> pts;
  for (std::size_t a = 0; a < hs.size(); ++a)
    for (std::size_t b = a + 1; b < hs.size(); ++b) {
      const double a0 = hs[a].normal(0), a1 = hs[a].normal(1);
      const double b0 = hs[b].normal(0), b1 = hs[b].normal(1);
      const double det = a0 * b1 - a1 * b0;
      if (std::abs(det) < 1e-12) continue;
      Vector p = Vector::Zero(3);
      p(0) = (hs[a].offset * b1 - a1 * hs[b].offset) / det;
      p(1) = (a0 * hs[b].offset - hs[a].offset * b0) / det;
      bool feasible = true;
      for (const auto& h : hs)
        if (h.normal.dot(p) - h.offset > tol) {
          feasible = false;
          break;
        }
      if (!feasible) continue;
      const bool dup = std::any_of(pts.begin(), pts.end(),
                                   [&](const Vector& q) { return (q - p).cwiseAbs().maxCoeff() < 1e-9; });
      if (!dup) pts.push_back(p);
    }
  return order_by_angle(pts);
}

}  // namespace oswitch
