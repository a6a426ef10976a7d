#include "oswitch/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oswitch/errors.hpp"

namespace oswitch {

const char* to_string(Quadrature q) { return q == Quadrature::gaussian ? "gaussian" : "trinomial"; }

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void add_transition(std::vector<Transition>& out, int target, double weight, double dW) {
  for (auto& t : out)
    if (t.target == target) {
      t.weight += weight;
      return;
    }
  out.push_back({target, weight, dW});
}

}  // namespace

Lattice build_lattice(const SdeParams& sde, const LatticeSpec& spec) {
  if (!(spec.T > 0.0)) throw ConfigError("lattice: T must be positive");
  if (spec.steps < 1) throw ConfigError("lattice: steps must be >= 1");
  if (!(spec.coverage > 0.0)) throw ConfigError("lattice: coverage must be positive");
  const double s0 = sde.vol(sde.x0);
  if (!(s0 > 0.0)) throw ConfigError("lattice: sigma(x0) must be positive");

  Lattice L;
  L.spec = spec;
  L.sde = sde;
  L.dt = spec.T / spec.steps;
  const double sdt = s0 * std::sqrt(L.dt);
  if (spec.spacing > 0.0)
    L.spacing = spec.spacing;
  else
    L.spacing = spec.mode == Quadrature::trinomial ? s0 * std::sqrt(3.0 * L.dt) : 0.5 * sdt;

  int half;
  if (spec.points > 0) {
    if (spec.points < 3 || spec.points % 2 == 0) throw ConfigError("lattice: points must be odd and >= 3");
    half = spec.points / 2;
  } else {
    half = static_cast<int>(std::ceil(spec.coverage * s0 * std::sqrt(spec.T) / L.spacing));
  }
  const int M = 2 * half + 1;
  L.rootIndex = half;
  L.x.resize(M);
  for (int m = 0; m < M; ++m) L.x(m) = sde.x0 + (m - half) * L.spacing;
  for (int m = 0; m < M; ++m)
    if (!(sde.vol(L.x(m)) > 1e-12)) {
      std::ostringstream os;
      os << "lattice: sigma vanishes or changes sign at grid node x = " << L.x(m);
      throw ConfigError(os.str());
    }

  L.transitions.resize(M);
  for (int m = 0; m < M; ++m) {
    const double x = L.x(m);
    const double mu = sde.drift(x) * L.dt;
    const double sig = sde.vol(x);
    const double var = sig * sig * L.dt;
    auto& out = L.transitions[m];
    auto dW = [&](int j) { return (L.x(j) - x - mu) / sig; };

    if (spec.mode == Quadrature::trinomial) {
      const double h = L.spacing;
      const double second = (var + mu * mu) / (h * h);
      const double pu = 0.5 * (second + mu / h);
      const double pd = 0.5 * (second - mu / h);
      const double pm = 1.0 - pu - pd;
      if (pu < -1e-15 || pd < -1e-15 || pm < -1e-15) {
        std::ostringstream os;
        os << "lattice: trinomial weights negative at x = " << x << " (pu=" << pu << ", pm=" << pm
           << ", pd=" << pd << "); use spacing >= " << std::sqrt(var + mu * mu) << " or a smaller dt";
        throw StabilityError(os.str());
      }
      const int up = std::min(m + 1, M - 1), dn = std::max(m - 1, 0);
      add_transition(out, dn, std::max(pd, 0.0), dW(dn));
      add_transition(out, m, std::max(pm, 0.0), dW(m));
      add_transition(out, up, std::max(pu, 0.0), dW(up));
    } else {
      const double s = std::sqrt(var);
      if (s < L.spacing) {
        std::ostringstream os;
        os << "lattice: grid too coarse for gaussian quadrature at x = " << x << " (sigma sqrt(dt) = " << s
           << " < spacing " << L.spacing << "); suggested spacing " << 0.5 * s;
        throw StabilityError(os.str());
      }
      const double lo = mu + x - 10.0 * s, hi = mu + x + 10.0 * s;
      for (int j = 0; j < M; ++j) {
        const double a = j == 0 ? -INFINITY : 0.5 * (L.x(j - 1) + L.x(j));
        const double b = j == M - 1 ? INFINITY : 0.5 * (L.x(j) + L.x(j + 1));
        if (b < lo || a > hi) continue;
        const double w = normal_cdf((b - x - mu) / s) - normal_cdf((a - x - mu) / s);
        if (w > 0.0) out.push_back({j, w, dW(j)});
      }
    }
    double total = 0.0;
    for (const auto& t : out) total += t.weight;
    for (auto& t : out) t.weight /= total;
  }
  return L;
}

Driver make_affine_driver(std::vector<std::function<double(double, double)>> base, Vector ay, Vector az,
                          std::vector<std::function<double(double)>> terminal) {
  const std::size_t d = base.size();
  if (terminal.size() != d || static_cast<std::size_t>(ay.size()) != d || static_cast<std::size_t>(az.size()) != d)
    throw ConfigError("driver: per-mode sizes differ");
  Driver drv;
  drv.dependsOnY = (ay.array() != 0.0).any();
  drv.dependsOnZ = (az.array() != 0.0).any();
  drv.f = [base, ay, az](Index i, double t, double x, double y, double z) {
    return base[i](t, x) + ay(i) * y + az(i) * z;
  };
  drv.g = [terminal](Index i, double x) { return terminal[i](x); };
  return drv;
}

LipschitzEstimate estimate_lipschitz(const Driver& driver, const Lattice& lattice, Index d) {
  LipschitzEstimate est;
  if (!driver.dependsOnY && !driver.dependsOnZ) return est;
  const int N = lattice.spec.steps;
  const int M = lattice.points();
  const double delta = 1e-4;
  for (int k : {0, N / 2, N - 1})
    for (int m = 0; m < M; m += std::max(1, M / 8))
      for (Index i = 0; i < d; ++i)
        for (double base : {-1.0, 0.0, 1.0}) {
          const double t = lattice.time(k), x = lattice.x(m);
          const double f0 = driver.f(i, t, x, base, base);
          est.y = std::max(est.y, std::abs(driver.f(i, t, x, base + delta, base) - f0) / delta);
          est.z = std::max(est.z, std::abs(driver.f(i, t, x, base, base + delta) - f0) / delta);
        }
  return est;
}

}  // namespace oswitch
