#include "oswitch/simulator.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "oswitch/errors.hpp"
#include "oswitch/parallel.hpp"

namespace oswitch {

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::optimal_threshold: return "optimal-threshold";
    case StrategyKind::fixed_schedule: return "fixed-schedule";
    case StrategyKind::randomized_baseline: return "randomized-baseline";
    case StrategyKind::never_switch: return "never-switch";
  }
  return "?";
}

StrategySpec StrategySpec::never_switch() { return StrategySpec{}; }

StrategySpec StrategySpec::fixed(std::vector<ScheduledSwitch> schedule) {
  StrategySpec s;
  s.kind = StrategyKind::fixed_schedule;
  s.schedule = std::move(schedule);
  return s;
}

StrategySpec StrategySpec::randomized(double probability, std::uint64_t id) {
  StrategySpec s;
  s.kind = StrategyKind::randomized_baseline;
  s.switchProbability = probability;
  s.baselineId = id;
  return s;
}

namespace {

int draw_index(const std::vector<Transition>& tr, double U) {
  double cum = 0.0;
  for (const auto& t : tr) {
    cum += t.weight;
    if (U < cum) return t.target;
  }
  for (auto it = tr.rbegin(); it != tr.rend(); ++it)
    if (it->weight > 0.0) return it->target;
  return tr.back().target;
}

ActiveControl grid_control(const ControlledTransitionModel& model, std::size_t u, Index mode) {
  if (u >= model.control_count()) throw ConfigError("strategy: control index out of range");
  ActiveControl ac;
  ac.u = model.controls[u];
  ac.index = u;
  ac.row = model.P[u].row(mode).transpose();
  ac.cost = model.cbar[u](mode);
  return ac;
}

void check_solution(const LatticeSolution* sol, const ControlledTransitionModel& model, const Lattice& lattice) {
  if (!sol) throw ConfigError("optimal strategy: no solved lattice supplied");
  if (sol->d != model.d || sol->M != lattice.points() || sol->steps != lattice.spec.steps)
    throw ConfigError("optimal strategy: solved lattice does not match the model/lattice");
}

}  // namespace

std::vector<int> sample_lattice_path(const Lattice& lattice, int start, std::uint64_t seed, bool antithetic) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> path(lattice.spec.steps + 1);
  path[0] = start;
  for (int k = 0; k < lattice.spec.steps; ++k) {
    double U = unif(rng);
    if (antithetic) U = 1.0 - U;
    path[k + 1] = draw_index(lattice.transitions[path[k]], U);
  }
  return path;
}

StrategyTrace sample_trace(const ControlledTransitionModel& model, const StrategySpec& strategy,
                           const Lattice& lattice, const std::vector<int>& xPath, Index startMode,
                           std::uint64_t seed) {
  const int N = lattice.spec.steps;
  if (static_cast<int>(xPath.size()) != N + 1) throw ConfigError("sample_trace: path length must be steps + 1");
  if (startMode < 0 || startMode >= model.d) throw ConfigError("sample_trace: start mode out of range");
  if (strategy.kind == StrategyKind::optimal_threshold) check_solution(strategy.solution.get(), model, lattice);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  StrategyTrace tr;
  tr.xPath = xPath;
  tr.modePath.resize(N + 1);
  Index mode = startMode;
  std::size_t nextScheduled = 0;

  for (int k = 0; k <= N; ++k) {
    const int m = xPath[k];
    int perStep = 0;
    while (true) {
      std::optional<ActiveControl> choice;
      switch (strategy.kind) {
        case StrategyKind::never_switch:
          break;
        case StrategyKind::fixed_schedule:
          while (nextScheduled < strategy.schedule.size() && strategy.schedule[nextScheduled].step < k)
            ++nextScheduled;
          if (nextScheduled < strategy.schedule.size() && strategy.schedule[nextScheduled].step == k)
            choice = grid_control(model, strategy.schedule[nextScheduled++].control, mode);
          break;
        case StrategyKind::randomized_baseline:
          if (perStep == 0 && unif(rng) < strategy.switchProbability) {
            std::uniform_int_distribution<std::size_t> pick(0, model.control_count() - 1);
            choice = grid_control(model, pick(rng), mode);
          }
          break;
        case StrategyKind::optimal_threshold: {
          const Vector y = strategy.solution->Yvec(k, m);
          const ActiveControl ac = obstacle_argmax(y, mode, model);
          const double tol = strategy.margin * (1.0 + y.cwiseAbs().maxCoeff());
          if (y(mode) - ac.value <= tol) choice = ac;
          break;
        }
      }
      if (!choice) break;
      if (tr.N >= strategy.maxSwitches || perStep >= strategy.maxSwitchesPerStep) {
        tr.truncated = true;
        break;
      }
      const Vector& row = choice->row;
      Index to = -1;
      int positive = 0;
      for (Index j = 0; j < row.size(); ++j)
        if (row(j) > 0.0) {
          ++positive;
          to = j;
        }
      double U = std::numeric_limits<double>::quiet_NaN();
      if (positive > 1) {
        U = unif(rng);
        double cum = 0.0;
        to = -1;
        for (Index j = 0; j < row.size(); ++j) {
          cum += row(j);
          if (U < cum && row(j) > 0.0) {
            to = j;
            break;
          }
        }
        if (to < 0)
          for (Index j = row.size() - 1; j >= 0; --j)
            if (row(j) > 0.0) {
              to = j;
              break;
            }
      }
      tr.A += choice->cost;
      ++tr.N;
      ++perStep;
      tr.events.push_back({k, lattice.time(k), mode, to, choice->u, U, choice->cost, tr.A, tr.N});
      mode = to;
    }
    tr.modePath[k] = mode;
  }
  return tr;
}

double trace_reward(const StrategyTrace& trace, const Driver& driver, const Lattice& lattice) {
  const int N = lattice.spec.steps;
  double running = 0.0;
  for (int k = 0; k < N; ++k)
    running += driver.f(trace.modePath[k], lattice.time(k), lattice.x(trace.xPath[k]), 0.0, 0.0) * lattice.dt;
  return running + driver.g(trace.modePath[N], lattice.x(trace.xPath[N])) - trace.A;
}

RewardEstimate evaluate_strategy(const ControlledTransitionModel& model, const StrategySpec& strategy,
                                 const Driver& driver, const Lattice& lattice, Index startMode, int pathCount,
                                 std::uint64_t seed, const EvaluateOptions& options) {
  if (driver.dependsOnY || driver.dependsOnZ)
    throw CapabilityError(
        "evaluate_strategy: the driver depends on (y,z); the reward is then a BSDE, use the rbsde solver");
  if (pathCount < 1) throw ConfigError("evaluate_strategy: pathCount must be >= 1");
  if (strategy.kind == StrategyKind::optimal_threshold) check_solution(strategy.solution.get(), model, lattice);
  const int start = options.startNode >= 0 ? options.startNode : lattice.rootIndex;
  const std::uint64_t decisionStream = 2 + (strategy.baselineId << 8);

  std::vector<double> values(pathCount);
  std::vector<char> truncated(pathCount, 0);
  parallel_for(static_cast<std::size_t>(pathCount), thread_count(), [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t p = b; p < e; ++p) {
      const std::uint64_t pathSeed = derive_seed(seed, 1, p);
      const int reps = options.antithetic ? 2 : 1;
      double acc = 0.0;
      for (int r = 0; r < reps; ++r) {
        const auto path = sample_lattice_path(lattice, start, pathSeed, r == 1);
        const auto trace = sample_trace(model, strategy, lattice, path, startMode,
                                        derive_seed(seed, decisionStream, 2 * p + r));
        acc += trace_reward(trace, driver, lattice);
        if (trace.truncated) truncated[p] = 1;
      }
      values[p] = acc / reps;
    }
  });

  RewardEstimate est;
  est.paths = pathCount;
  est.seed = seed;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / pathCount;
  double ss = 0.0;
  for (double v : values) ss += (v - est.mean) * (v - est.mean);
  est.se = pathCount > 1 ? std::sqrt(ss / (pathCount - 1) / pathCount) : 0.0;
  for (char t : truncated) est.truncatedPaths += t;
  est.truncationFrequency = static_cast<double>(est.truncatedPaths) / pathCount;
  return est;
}

StrategySpec optimal_strategy(std::shared_ptr<const LatticeSolution> solution,
                              const ControlledTransitionModel& model, const Lattice& lattice) {
  check_solution(solution.get(), model, lattice);
  StrategySpec s;
  s.kind = StrategyKind::optimal_threshold;
  s.solution = std::move(solution);
  return s;
}

OracleField dp_oracle(const ControlledTransitionModel& model, const Driver& driver, const Lattice& lattice) {
  if (driver.dependsOnY || driver.dependsOnZ)
    throw CapabilityError("dp_oracle: the driver depends on (y,z)");
  if (model.closedFormObstacle) throw CapabilityError("dp_oracle: needs a finite control grid");
  const Index d = model.d;
  const std::size_t U = model.control_count();
  for (std::size_t u = 0; u < U; ++u)
    if (!(model.cbar[u].minCoeff() > 0.0)) throw CapabilityError("dp_oracle: needs positive costs");

  OracleField out;
  out.steps = lattice.spec.steps;
  out.M = lattice.points();
  out.d = d;
  out.V.assign(static_cast<std::size_t>(out.steps + 1) * out.M * d, 0.0);
  const int M = out.M;
  auto idx = [&](int k, int m, Index i) { return (static_cast<std::size_t>(k) * M + m) * d + i; };

  // v_i <- max(cont_i, max_u sum_j P^u_ij v_j - c^u_i), Gauss-Seidel, from v = cont.
  auto settle = [&](std::vector<double>& v) {
    for (int sweep = 1; sweep <= 1000000; ++sweep) {
      double change = 0.0, scale = 1.0;
      for (Index i = 0; i < d; ++i) {
        double best = v[i];
        for (std::size_t u = 0; u < U; ++u) {
          double s = -model.cbar[u](i);
          for (Index j = 0; j < d; ++j) s += model.P[u](i, j) * v[j];
          if (s > best) best = s;
        }
        change = std::max(change, best - v[i]);
        scale = std::max(scale, std::abs(best));
        v[i] = best;
      }
      if (change <= 1e-15 * scale) return sweep;
    }
    throw StabilityError("dp_oracle: value iteration did not settle");
  };

  std::vector<double> v(d);
  for (int m = 0; m < M; ++m) {
    for (Index i = 0; i < d; ++i) v[i] = driver.g(i, lattice.x(m));
    out.maxSweeps = std::max(out.maxSweeps, settle(v));
    for (Index i = 0; i < d; ++i) out.V[idx(out.steps, m, i)] = v[i];
  }
  for (int k = out.steps - 1; k >= 0; --k)
    for (int m = 0; m < M; ++m) {
      for (Index i = 0; i < d; ++i) {
        double e = 0.0;
        for (const auto& tr : lattice.transitions[m]) e += tr.weight * out.V[idx(k + 1, tr.target, i)];
        v[i] = e + lattice.dt * driver.f(i, lattice.time(k), lattice.x(m), 0.0, 0.0);
      }
      out.maxSweeps = std::max(out.maxSweeps, settle(v));
      for (Index i = 0; i < d; ++i) out.V[idx(k, m, i)] = v[i];
    }
  return out;
}

RepresentationReport verify_representation(const ControlledTransitionModel& model, const Driver& driver,
                                           const Lattice& lattice, int paths, std::uint64_t seed,
                                           int baselineCount) {
  if (driver.dependsOnY || driver.dependsOnZ)
    throw CapabilityError("verify_representation: the driver depends on (y,z); use the rbsde solver");
  auto sol = std::make_shared<const LatticeSolution>(solve(model, lattice, driver));
  const StrategySpec phi = optimal_strategy(sol, model, lattice);

  RepresentationReport rep;
  rep.seed = seed;
  rep.paths = paths;
  rep.passed = true;
  for (Index i = 0; i < model.d; ++i) {
    ModeReport mr;
    mr.mode = i;
    mr.Y = sol->Y(0, sol->rootIndex, i);
    mr.optimal = evaluate_strategy(model, phi, driver, lattice, i, paths, derive_seed(seed, 10, i));
    mr.optimalPass = std::abs(mr.optimal.mean - mr.Y) <= 3.0 * mr.optimal.se + 1e-9 * (1.0 + std::abs(mr.Y));
    mr.baselinesPass = true;
    for (int b = 0; b < baselineCount; ++b) {
      const double prob = static_cast<double>(b + 1) / (baselineCount + 1);
      const auto est = evaluate_strategy(model, StrategySpec::randomized(prob, static_cast<std::uint64_t>(b + 1)),
                                         driver, lattice, i, paths, derive_seed(seed, 20 + b, i));
      if (est.mean > mr.Y + 3.0 * est.se + 1e-9 * (1.0 + std::abs(mr.Y))) mr.baselinesPass = false;
      mr.baselines.push_back(est);
    }
    mr.neverSwitch = evaluate_strategy(model, StrategySpec::never_switch(), driver, lattice, i, paths,
                                       derive_seed(seed, 11, i));
    rep.passed = rep.passed && mr.optimalPass && mr.baselinesPass;
    rep.modes.push_back(std::move(mr));
  }
  return rep;
}

std::string RepresentationReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "representation check: paths=" << paths << " seed=" << seed << " result=" << (passed ? "PASS" : "FAIL")
     << "\n";
  for (const auto& m : modes) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& b : m.baselines) worst = std::max(worst, b.mean - m.Y);
    os << "mode " << m.mode << ": Y=" << m.Y << " phi*=" << m.optimal.mean << " (se " << m.optimal.se << ", truncated "
       << m.optimal.truncationFrequency << ") " << (m.optimalPass ? "pass" : "FAIL") << "; baselines "
       << m.baselines.size() << " worst gap " << worst << " " << (m.baselinesPass ? "pass" : "FAIL")
       << "; never-switch " << m.neverSwitch.mean << " (se " << m.neverSwitch.se << ")\n";
  }
  return os.str();
}

void write_trace_csv(std::ostream& os, const StrategyTrace& trace) {
  os << std::setprecision(17) << "k,t,mode,control,uniform,cost,A,N\n";
  for (const auto& e : trace.events)
    os << e.k << ',' << e.t << ',' << e.to << ',' << e.control << ',' << e.uniform << ',' << e.cost << ',' << e.A
       << ',' << e.N << '\n';
}

}  // namespace oswitch
