#include "oswitch/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "oswitch/errors.hpp"
#include "oswitch/parallel.hpp"

namespace oswitch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Vector dirichlet(std::mt19937_64& rng, Index n) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = g(rng);
  return x / x.sum();
}

}  // namespace

const char* to_string(Construction c) {
  switch (c) {
    case Construction::markovian: return "markovian-barycentric";
    case Construction::dim3: return "dim3-nonmarkovian";
    case Construction::symmetric: return "symmetric-family";
    case Construction::controlled_dim3: return "controlled-dim3-vertices";
  }
  return "?";
}

const char* to_string(Copositivity c) {
  switch (c) {
    case Copositivity::strict: return "strict";
    case Copositivity::not_strict: return "not-strict";
    case Copositivity::inconclusive: return "inconclusive";
  }
  return "?";
}

CopositivityResult copositivity_check(const Matrix& M, std::uint64_t seed) {
  const Index n = M.rows();
  if (n == 0 || M.cols() != n) throw ConfigError("copositivity_check: matrix must be square");
  const Matrix S = 0.5 * (M + M.transpose());
  const double tol = 1e-12 * std::max(1.0, max_abs(S));
  CopositivityResult res;

  auto finish = [&](const Vector& x) {
    res.witness = x / x.maxCoeff();
    res.minValue = res.witness.dot(S * res.witness);
  };

  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() > tol) {
    res.status = Copositivity::strict;
    res.method = "positive-definite symmetric part";
    finish(Vector::Ones(n));
    return res;
  }

  if (n <= 6) {
    // Minimum of x^T S x over the simplex: every local minimiser is a KKT point
    // in the relative interior of some face.
    double best = kInf;
    Vector bestX;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      std::vector<Index> J;
      for (Index i = 0; i < n; ++i)
        if (mask & (1u << i)) J.push_back(i);
      const Index k = static_cast<Index>(J.size());
      Matrix K = Matrix::Zero(k + 1, k + 1);
      for (Index a = 0; a < k; ++a) {
        for (Index b = 0; b < k; ++b) K(a, b) = S(J[a], J[b]);
        K(a, k) = 1.0;
        K(k, a) = 1.0;
      }
      Vector rhs = Vector::Zero(k + 1);
      rhs(k) = 1.0;
      Eigen::FullPivLU<Matrix> lu(K);
      if (!lu.isInvertible()) continue;
      const Vector sol = lu.solve(rhs);
      if ((sol.head(k).array() <= 0.0).any()) continue;
      Vector x = Vector::Zero(n);
      for (Index a = 0; a < k; ++a) x(J[a]) = sol(a);
      const double v = x.dot(S * x);
      if (v < best) {
        best = v;
        bestX = x;
      }
    }
    res.method = "exact face enumeration";
    res.status = best > tol ? Copositivity::strict : Copositivity::not_strict;
    finish(bestX);
    return res;
  }

  bool nonnegative = (S.array() >= 0.0).all() && (S.diagonal().array() > 0.0).all();
  if (nonnegative) {
    res.status = Copositivity::strict;
    res.method = "nonnegative entries, positive diagonal";
    finish(Vector::Ones(n));
    return res;
  }
  std::mt19937_64 rng(mix_seed(seed));
  double best = kInf;
  Vector bestX;
  for (int s = 0; s < 100000; ++s) {
    const Vector x = dirichlet(rng, n);
    const double v = x.dot(S * x);
    if (v < best) {
      best = v;
      bestX = x;
    }
  }
  res.method = "simplex sampling (1e5 points)";
  res.status = best <= tol ? Copositivity::not_strict : Copositivity::inconclusive;
  finish(bestX);
  return res;
}

Matrix markovian_vertex_matrix(const Matrix& Q, Index j) {
  const Index d = Q.rows();
  const Matrix B = remove_row_col(Q, j, j).transpose().partialPivLu().inverse();
  Matrix H = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index k = 0; k < d; ++k)
      if (i != j && k != j) H(i, k) = B(reduced_index(i, j), reduced_index(k, j));
  return H;
}

Vector ReflectionField::weights(const Vector& y) const {
  const Index d = vertices.rows();
  if (y.size() != d) throw ConfigError("ReflectionField: dimension mismatch");
  Matrix M(d, d);
  M.topRows(d - 1) = vertices.topRows(d - 1);
  M.row(d - 1).setOnes();
  const auto lu = M.partialPivLu();
  auto solve = [&](const Vector& ys) {
    Vector rhs(d);
    rhs.head(d - 1) = ys.head(d - 1);
    rhs(d - 1) = 1.0;
    return Vector(lu.solve(rhs));
  };
  Vector ys = slice_representative(y);
  Vector lambda = solve(ys);
  if (lambda.minCoeff() < -1e-12) {
    ys = slice_representative(euclidean_project(ys, halfSpaces));
    lambda = solve(ys);
  }
  for (Index j = 0; j < d; ++j)
    if (lambda(j) <= 1e-12) lambda(j) = 0.0;
  return lambda / lambda.sum();
}

namespace {

Index match_vertex(const Matrix& vertices, const Vector& y) {
  const Vector ys = slice_representative(y);
  for (Index j = 0; j < vertices.cols(); ++j)
    if ((vertices.col(j) - ys).cwiseAbs().maxCoeff() <= 1e-9) return j;
  return -1;
}

}  // namespace

Matrix ReflectionField::evaluate(const Vector& y) const {
  if (vertexOnly) {
    const Index j = match_vertex(vertices, y);
    if (j < 0)
      throw CapabilityError("ReflectionField: " + std::string(to_string(construction)) +
                            " is defined at vertices only; edge interpolation is not implemented");
    return vertexMatrices[j];
  }
  const Vector lambda = weights(y);
  for (Index j = 0; j < lambda.size(); ++j)
    if (lambda(j) == 1.0) return vertexMatrices[j];
  Matrix H = Matrix::Zero(vertices.rows(), vertices.rows());
  for (Index j = 0; j < lambda.size(); ++j)
    if (lambda(j) != 0.0) H += lambda(j) * vertexMatrices[j];
  return H;
}

ActiveCone ReflectionField::cone_at(const Vector& y) const {
  ActiveCone cone;
  const Index d = vertices.rows();
  if (vertexOnly) {
    const Index j = match_vertex(vertices, y);
    if (j < 0) throw CapabilityError("ReflectionField: cone available at vertices only");
    const Vector v = vertices.col(j);
    for (Index i = 0; i < d; ++i) {
      if (i == j) continue;
      Vector n = obstacle_argmax(v, i, model).row;
      n(i) -= 1.0;
      cone.active.push_back(i);
      cone.normals.push_back(n);
    }
    return cone;
  }
  const Vector lambda = weights(y);
  for (Index i = 0; i < d; ++i)
    if (lambda(i) <= 1e-8) {
      cone.active.push_back(i);
      cone.normals.push_back(-Q.row(i).transpose());
    }
  return cone;
}

namespace {

// Every vertex matrix must send the normals of its saturated constraints to
// nonpositive multiples of the matching unit vectors.
void check_vertex_mapping(const ReflectionField& f, double tol) {
  const Index d = f.vertices.rows();
  for (Index j = 0; j < d; ++j) {
    const ActiveCone cone = f.cone_at(f.vertices.col(j));
    for (std::size_t a = 0; a < cone.active.size(); ++a) {
      const Index i = cone.active[a];
      Vector w = f.vertexMatrices[j] * cone.normals[a];
      const double diag = w(i);
      w(i) = 0.0;
      if (!(diag < 0.0) || w.cwiseAbs().maxCoeff() > tol) {
        std::ostringstream os;
        os << "vertex " << j << ": H n_" << i << " leaves the reflection cone";
        throw Error(ErrorKind::internal, os.str());
      }
    }
  }
}

ReflectionField field_skeleton(Construction c, const ControlledTransitionModel& model) {
  ReflectionField f;
  f.construction = c;
  f.model = model;
  f.halfSpaces = half_spaces(model);
  if (model.uncontrolled()) f.Q = Matrix::Identity(model.d, model.d) - model.P[0];
  f.notes.push_back("extended outside D by Euclidean projection; continuous, not globally C^1");
  return f;
}

}  // namespace

ReflectionField build_H_markovian(const ControlledTransitionModel& model) {
  if (!model.uncontrolled())
    throw CapabilityError("build_H_markovian: needs an uncontrolled model");
  model.check();
  const ChainAnalysis a = analyze_chain(model.P[0], model.cbar[0]);
  if (!(a.muCbar > 0.0)) throw GeometryError("build_H_markovian: domain has empty interior");
  for (Index j = 0; j < model.d; ++j) {
    const CopositivityResult cop = copositivity_check(remove_row_col(a.Q, j, j));
    if (cop.status != Copositivity::strict) {
      std::ostringstream os;
      os.precision(17);
      os << "build_H_markovian: Q^{(" << j << "," << j << ")} is " << to_string(cop.status)
         << " copositive (" << cop.method << "); witness [";
      for (Index k = 0; k < cop.witness.size(); ++k) os << (k ? ", " : "") << cop.witness(k);
      os << "], value " << cop.minValue;
      throw GeometryError(os.str());
    }
  }
  ReflectionField f = field_skeleton(Construction::markovian, model);
  f.vertices = slice_vertices(a);
  for (Index j = 0; j < model.d; ++j) f.vertexMatrices.push_back(markovian_vertex_matrix(a.Q, j));
  check_vertex_mapping(f, 1e-9);
  return f;
}

ReflectionField build_H_dim3(double p, double q, double r, const Vector& costs) {
  for (double x : {p, q, r})
    if (!(x > 0.0 && x < 1.0))
      throw GeometryError("build_H_dim3: p, q, r must lie in (0,1); construction impossible otherwise");
  const auto model = builtin::dim3(p, q, r, costs);
  model.check();
  const ChainAnalysis a = analyze_chain(model.P[0], model.cbar[0]);
  if (!(a.muCbar > 0.0)) throw GeometryError("build_H_dim3: domain has empty interior");

  ReflectionField f = field_skeleton(Construction::dim3, model);
  f.vertices = slice_vertices(a);
  f.symmetricExpected = true;

  const double s = r * (1.0 - p);
  const double t = (1.0 - q) * (1.0 - r);
  const Matrix Hv1 = Matrix{{1 + p, 1 + p * q, 1}, {1 + p * q, 1 + q, 1}, {1, 1, 1}} / (p * q * (1 - p * q));
  const Matrix Hv2 = Matrix{{2 - p, 1, 1 + s}, {1, 1, 1}, {1 + s, 1, 1 + r}} / (s * (1 - s));
  const Matrix Hv3 = Matrix{{1, 1, 1}, {1, 2 - q, 1 + t}, {1, 1 + t, 2 - r}} / (t * (1 - t));
  // v^1 saturates constraints 1 and 2, i.e. it is the vertex leaving constraint 3 free.
  f.vertexMatrices = {Hv3, Hv2, Hv1};
  check_vertex_mapping(f, 1e-10);
  return f;
}

Matrix symmetric_family_last_vertex(int d, double a) {
  const double g = static_cast<double>(d - 1) / d;
  Matrix H = Matrix::Constant(d, d, a - g);
  H.diagonal().setConstant(a);
  H.row(d - 1).setConstant(a - 2 * g);
  H.col(d - 1).setConstant(a - 2 * g);
  return H;
}

double symmetric_family_det(int d, double a) {
  const double g = static_cast<double>(d - 1) / d;
  return (a - 2 * g) * (d - 1) * std::pow(g, d - 2);
}

double symmetric_family_trace(int d, double a) { return d * a - 2.0 * (d - 1) / d; }

ReflectionField build_H_symmetric(int d) {
  if (d < 3) throw CapabilityError("build_H_symmetric: needs d >= 3");
  const auto model = builtin::symmetric(d);
  const ChainAnalysis a = analyze_chain(model.P[0], model.cbar[0]);
  ReflectionField f = field_skeleton(Construction::symmetric, model);
  f.vertices = slice_vertices(a);
  f.symmetricExpected = true;

  const Matrix Hd = symmetric_family_last_vertex(d);
  if (std::abs(Hd.determinant() - symmetric_family_det(d)) > 1e-10 ||
      std::abs(Hd.trace() - symmetric_family_trace(d)) > 1e-10)
    throw Error(ErrorKind::internal, "build_H_symmetric: closed-form det/trace mismatch");
  for (int k = 0; k < d; ++k) {
    Eigen::PermutationMatrix<Eigen::Dynamic> swap(d);
    swap.setIdentity();
    swap.applyTranspositionOnTheRight(k, d - 1);
    f.vertexMatrices.push_back(swap * Hd * swap.transpose());
  }
  check_vertex_mapping(f, 1e-10);
  return f;
}

ReflectionField build_H_controlled_dim3_vertices() {
  const auto model = builtin::example3();
  ReflectionField f = field_skeleton(Construction::controlled_dim3, model);
  f.vertexOnly = true;
  f.symmetricExpected = true;
  f.vertices = Matrix{{1, 0, -1}, {0, 1, -1}, {0, 0, 0}};
  f.vertexMatrices = {Matrix{{1, 1, 1}, {1, 2, 1}, {1, 1, 2}},
                      Matrix{{2, 1, 1}, {1, 1, 1}, {1, 1, 2}},
                      Matrix{{2, 1, 1}, {1, 2, 1}, {1, 1, 1}}};
  f.notes.push_back("vertex matrices only; curved-edge interpolation not implemented");
  for (Index j = 0; j < 3; ++j) {
    const Vector v = f.vertices.col(j);
    for (Index i = 0; i < 3; ++i) {
      const double slack = v(i) - obstacle(v, i, model);
      if (i != j ? std::abs(slack) > 1e-12 : !(slack > 0.0))
        throw Error(ErrorKind::internal, "build_H_controlled_dim3_vertices: vertex saturation mismatch");
    }
  }
  check_vertex_mapping(f, 1e-10);
  return f;
}

std::string HCertificate::to_record() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "field: " << to_string(construction) << "\n"
     << "model: " << model << "\n"
     << "passed: " << (passed ? "true" : "false") << "\n"
     << "eta_min: " << etaMin << "\n"
     << "cone_max_defect: " << coneMaxDefect << "\n"
     << "symmetry_defect: " << symmetryDefect << "\n"
     << "bound_max: " << boundMax << "\n"
     << "spectral_min: " << spectralMin << "\n"
     << "spectral_max: " << spectralMax << "\n"
     << "L: " << L << "\n"
     << "translation_defect: " << translationDefect << "\n"
     << "samples: " << samples << "\n"
     << "seed: " << seed << "\n";
  for (const auto& f : failures) os << "failure: " << f << "\n";
  return os.str();
}

HCertificate verify_H(const ReflectionField& field, int sampleCount, std::uint64_t seed) {
  const Index d = field.vertices.rows();
  if (sampleCount < d) sampleCount = static_cast<int>(d);

  struct SampleResult {
    double eta = kInf, cone = 0.0, sym = 0.0, bound = 0.0, specMin = kInf, specMax = 0.0, trans = 0.0;
    std::string where;
  };
  std::vector<SampleResult> results(sampleCount);

  parallel_for(static_cast<std::size_t>(sampleCount), thread_count(),
               [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t s = begin; s < end; ++s) {
      std::mt19937_64 rng(derive_seed(seed, 0x4856u, s));
      std::uniform_real_distribution<double> unif(-2.0, 2.0);
      SampleResult& r = results[s];

      // Stratum: vertices first, then faces spanned by 2..d-1 vertices.
      Vector lambda = Vector::Zero(d);
      std::ostringstream where;
      if (static_cast<Index>(s) < d || field.vertexOnly || d == 2) {
        const Index j = static_cast<Index>(s) % d;
        lambda(j) = 1.0;
        where << "vertex " << j;
      } else {
        std::uniform_int_distribution<Index> size(2, d - 1);
        const Index k = size(rng);
        std::vector<Index> idx(d);
        for (Index i = 0; i < d; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        const Vector w = dirichlet(rng, k);
        where << "face {";
        for (Index a = 0; a < k; ++a) {
          lambda(idx[a]) = w(a);
          where << (a ? "," : "") << idx[a];
        }
        where << "}";
      }
      r.where = where.str();
      const Vector y = field.vertices * lambda;
      const Matrix H = field.evaluate(y);
      const Matrix Hshift = field.evaluate((y.array() + unif(rng)).matrix());
      r.trans = max_abs(H - Hshift);
      r.sym = max_abs(H - H.transpose());
      r.bound = Eigen::JacobiSVD<Matrix>(H).singularValues()(0);
      if (field.symmetricExpected) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
        r.specMin = es.eigenvalues().minCoeff();
        r.specMax = es.eigenvalues().maxCoeff();
      }

      const ActiveCone cone = field.cone_at(y);
      if (cone.normals.empty()) continue;
      std::vector<Vector> probes;
      for (const auto& n : cone.normals) probes.push_back(n);
      for (int t = 0; t < 4; ++t) {
        const Vector alpha = dirichlet(rng, static_cast<Index>(cone.normals.size()));
        Vector v = Vector::Zero(d);
        for (std::size_t a = 0; a < cone.normals.size(); ++a) v += alpha(static_cast<Index>(a)) * cone.normals[a];
        probes.push_back(v);
      }
      std::vector<bool> isActive(d, false);
      for (Index i : cone.active) isActive[i] = true;
      for (Vector v : probes) {
        const double nv = v.norm();
        if (nv == 0.0) continue;
        v /= nv;
        const Vector hv = H * v;
        for (Index i = 0; i < d; ++i)
          r.cone = std::max(r.cone, isActive[i] ? std::max(0.0, hv(i)) : std::abs(hv(i)));
        r.eta = std::min(r.eta, v.dot(hv));
      }
    }
  });

  HCertificate c;
  c.construction = field.construction;
  c.model = field.model.name;
  c.samples = sampleCount;
  c.seed = seed;
  c.etaMin = kInf;
  c.spectralMin = kInf;
  double etaWorst = kInf, coneWorst = -1.0;
  std::size_t etaAt = 0, coneAt = 0;
  for (std::size_t s = 0; s < results.size(); ++s) {
    const auto& r = results[s];
    if (r.eta < etaWorst) { etaWorst = r.eta; etaAt = s; }
    if (r.cone > coneWorst) { coneWorst = r.cone; coneAt = s; }
    c.coneMaxDefect = std::max(c.coneMaxDefect, r.cone);
    c.symmetryDefect = std::max(c.symmetryDefect, r.sym);
    c.boundMax = std::max(c.boundMax, r.bound);
    c.translationDefect = std::max(c.translationDefect, r.trans);
    c.spectralMin = std::min(c.spectralMin, r.specMin);
    c.spectralMax = std::max(c.spectralMax, r.specMax);
  }
  c.etaMin = etaWorst;
  if (!field.symmetricExpected) c.spectralMin = c.spectralMax = 0.0;
  c.L = (field.symmetricExpected && c.spectralMin > 0.0) ? std::max(c.spectralMax, 1.0 / c.spectralMin) : c.boundMax;

  auto fail = [&](std::size_t s, const std::string& what) {
    std::ostringstream os;
    os << "sample " << s << " (" << results[s].where << "): " << what;
    c.failures.push_back(os.str());
  };
  if (c.coneMaxDefect > 1e-9) fail(coneAt, "cone defect " + std::to_string(c.coneMaxDefect));
  if (!(c.etaMin >= 1e-6)) fail(etaAt, "coercivity " + std::to_string(c.etaMin) + " below 1e-6");
  if (c.translationDefect > 1e-9) c.failures.push_back("field is not invariant along (1,...,1)");
  if (field.symmetricExpected) {
    if (c.symmetryDefect > 1e-12) c.failures.push_back("symmetry defect " + std::to_string(c.symmetryDefect));
    if (!(c.spectralMin > 0.0)) c.failures.push_back("not positive definite");
  }
  c.passed = c.failures.empty();
  return c;
}

Dim4Witness dim4_counterexample() {
  Dim4Witness w;
  const auto model = builtin::dim4();
  w.P = model.P[0];
  const Matrix Q = Matrix::Identity(4, 4) - w.P;
  w.valid = validate_model(model.P, model.cbar).valid;
  w.irreducible = irreducible(w.P);
  w.n1 = -Q.row(0).transpose();
  w.n2 = -Q.row(1).transpose();
  w.n3 = -Q.row(2).transpose();
  w.H = markovian_vertex_matrix(Q, 3);
  w.v = 0.5 * w.n1 + w.n2 + (std::sqrt(3.0) / 2.0) * w.n3;
  w.vHv = w.v.dot(w.H * w.v);
  w.copositivity = copositivity_check(remove_row_col(Q, 3, 3));
  return w;
}

}  // namespace oswitch
