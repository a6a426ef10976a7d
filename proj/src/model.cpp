#include "oswitch/model.hpp"

#include <cmath>

#include "oswitch/errors.hpp"
#include "oswitch/markov.hpp"

namespace oswitch {

bool ControlledTransitionModel::common_transition() const {
  for (std::size_t u = 1; u < P.size(); ++u)
    if (P[u] != P[0]) return false;
  return true;
}

Vector ControlledTransitionModel::min_costs() const {
  Vector m = cbar.at(0);
  for (std::size_t u = 1; u < cbar.size(); ++u) m = m.cwiseMin(cbar[u]);
  return m;
}

void ControlledTransitionModel::check() const {
  if (controls.empty()) throw ConfigError("model '" + name + "': no controls");
  if (controls.size() != P.size() || controls.size() != cbar.size())
    throw ConfigError("model '" + name + "': control, matrix and cost counts differ");
  for (std::size_t u = 1; u < controls.size(); ++u)
    if (!(controls[u] > controls[u - 1]))
      throw ConfigError("model '" + name + "': controls must be strictly increasing");
  if (P[0].rows() != d) throw ConfigError("model '" + name + "': d does not match matrix size");
  const auto rep = validate_model(P, cbar);
  if (!rep.valid) throw ConfigError("model '" + name + "': " + rep.issues.front());
  if (closedFormObstacle && d != 3)
    throw ConfigError("model '" + name + "': closed-form obstacle needs d = 3");
}

Vector quadratic_cyclic_row(double u, Index i) {
  Vector row = Vector::Zero(3);
  row((i + 1) % 3) = u;
  row((i + 2) % 3) = 1.0 - u;
  return row;
}

double quadratic_cyclic_cost(double u) { return 1.0 - u * (1.0 - u); }

ControlledTransitionModel classical_embedding(const Matrix& costMatrix) {
  const Index d = costMatrix.rows();
  if (d < 2 || costMatrix.cols() != d)
    throw ConfigError("classical_embedding: cost matrix must be square with d >= 2");
  for (Index i = 0; i < d; ++i)
    if (costMatrix(i, i) != 0.0)
      throw ConfigError("classical_embedding: diagonal cost c_{" + std::to_string(i) + "," +
                        std::to_string(i) + "} must be 0");
  ControlledTransitionModel m;
  m.name = "classical";
  m.d = d;
  for (Index u = 1; u < d; ++u) {
    Matrix P = Matrix::Zero(d, d);
    Vector c(d);
    for (Index i = 0; i < d; ++i) {
      const Index j = (i + u) % d;
      P(i, j) = 1.0;
      c(i) = costMatrix(i, j);
    }
    m.controls.push_back(static_cast<double>(u));
    m.P.push_back(P);
    m.cbar.push_back(c);
  }
  return m;
}

namespace builtin {

ControlledTransitionModel example1() {
  Matrix c = Matrix::Ones(3, 3);
  c.diagonal().setZero();
  auto m = classical_embedding(c);
  m.name = "example1";
  return m;
}

ControlledTransitionModel example2(double c) {
  Matrix P = Matrix::Constant(3, 3, 0.5);
  P.diagonal().setZero();
  auto m = uncontrolled(P, Vector::Constant(3, c), "example2");
  m.controls = {0.0};
  return m;
}

ControlledTransitionModel example3(int gridPoints, bool closedForm) {
  if (gridPoints < 2) throw ConfigError("example3: need at least 2 grid points");
  ControlledTransitionModel m;
  m.name = "example3";
  m.d = 3;
  m.closedFormObstacle = closedForm;
  for (int k = 0; k < gridPoints; ++k) {
    const double u = static_cast<double>(k) / (gridPoints - 1);
    Matrix P(3, 3);
    for (Index i = 0; i < 3; ++i) P.row(i) = quadratic_cyclic_row(u, i).transpose();
    m.controls.push_back(u);
    m.P.push_back(P);
    m.cbar.push_back(Vector::Constant(3, quadratic_cyclic_cost(u)));
  }
  return m;
}

ControlledTransitionModel signed_two_control() {
  Matrix P = Matrix::Constant(3, 3, 0.5);
  P.diagonal().setZero();
  ControlledTransitionModel m;
  m.name = "signed-two-control";
  m.d = 3;
  m.controls = {0.0, 1.0};
  m.P = {P, P};
  m.cbar = {Vector{{-0.5, 1.2, 0.7}}, Vector{{1.5, 0.2, 0.2}}};
  return m;
}

ControlledTransitionModel symmetric(int d, double c) {
  if (d < 2) throw ConfigError("symmetric: d must be >= 2");
  Matrix P = Matrix::Constant(d, d, 1.0 / (d - 1));
  P.diagonal().setZero();
  return uncontrolled(P, Vector::Constant(d, c), "symmetric" + std::to_string(d));
}

ControlledTransitionModel dim3(double p, double q, double r, const Vector& c) {
  Matrix P{{0.0, p, 1.0 - p}, {q, 0.0, 1.0 - q}, {r, 1.0 - r, 0.0}};
  return uncontrolled(P, c, "dim3");
}

ControlledTransitionModel dim4() {
  const double s = std::sqrt(3.0);
  Matrix P{{0.0, s / 2, 0.0, 1.0 - s / 2},
           {1.0 - s / 2, 0.0, s - 1.0, 1.0 - s / 2},
           {0.0, 1.0, 0.0, 0.0},
           {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}};
  return uncontrolled(P, Vector::Ones(4), "dim4");
}

ControlledTransitionModel uncontrolled(const Matrix& P, const Vector& c, std::string name) {
  ControlledTransitionModel m;
  m.name = std::move(name);
  m.d = P.rows();
  m.controls = {0.0};
  m.P = {P};
  m.cbar = {c};
  return m;
}

}  // namespace builtin

}  // namespace oswitch
