#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oswitch/domain.hpp"
#include "oswitch/lattice.hpp"
#include "oswitch/rbsde.hpp"

namespace oswitch {

enum class StrategyKind { optimal_threshold, fixed_schedule, randomized_baseline, never_switch };
const char* to_string(StrategyKind k);

struct ScheduledSwitch {
  int step = 0;
  std::size_t control = 0;  // index into the model's control grid
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::never_switch;
  // optimal_threshold
  std::shared_ptr<const LatticeSolution> solution;
  double margin = 1e-9;
  // fixed_schedule
  std::vector<ScheduledSwitch> schedule;
  // randomized_baseline: at each step switch once with this probability, uniform control
  double switchProbability = 0.0;
  std::uint64_t baselineId = 0;
  // admissibility guards
  int maxSwitchesPerStep = 1000;
  int maxSwitches = 100000;

  static StrategySpec never_switch();
  static StrategySpec fixed(std::vector<ScheduledSwitch> schedule);
  static StrategySpec randomized(double probability, std::uint64_t id);
};

struct SwitchEvent {
  int k = 0;
  double t = 0.0;
  Index from = 0;
  Index to = 0;
  double control = 0.0;
  double uniform = 0.0;  // NaN when the drawn row is deterministic
  double cost = 0.0;
  double A = 0.0;        // cumulative cost after this switch
  int N = 0;             // switch count after this switch
};

struct StrategyTrace {
  std::vector<SwitchEvent> events;
  std::vector<Index> modePath;  // mode in force after decisions at step k, k = 0..N
  std::vector<int> xPath;
  double A = 0.0;
  int N = 0;
  bool truncated = false;
};

/// Lattice path from the transition weights, starting at node `start`.
std::vector<int> sample_lattice_path(const Lattice& lattice, int start, std::uint64_t seed, bool antithetic = false);

/// One trace along a given lattice path. Decisions at step k see only the path
/// up to k and earlier draws.
StrategyTrace sample_trace(const ControlledTransitionModel& model, const StrategySpec& strategy,
                           const Lattice& lattice, const std::vector<int>& xPath, Index startMode,
                           std::uint64_t seed);

/// Riemann-sum reward of a trace: sum_k f(t_k, x_k, a_k) dt + g^{a_N}(x_N) - A.
double trace_reward(const StrategyTrace& trace, const Driver& driver, const Lattice& lattice);

struct RewardEstimate {
  double mean = 0.0;
  double se = 0.0;
  int paths = 0;
  std::uint64_t seed = 0;
  int truncatedPaths = 0;
  double truncationFrequency = 0.0;
};

struct EvaluateOptions {
  bool antithetic = false;
  int startNode = -1;  // default: lattice root
};

RewardEstimate evaluate_strategy(const ControlledTransitionModel& model, const StrategySpec& strategy,
                                 const Driver& driver, const Lattice& lattice, Index startMode, int pathCount,
                                 std::uint64_t seed, const EvaluateOptions& options = {});

/// phi*: switch while the current mode sits on its obstacle, using the
/// smallest maximising control.
StrategySpec optimal_strategy(std::shared_ptr<const LatticeSolution> solution,
                              const ControlledTransitionModel& model, const Lattice& lattice);

struct OracleField {
  int steps = 0, M = 0;
  Index d = 0;
  std::vector<double> V;
  int maxSweeps = 0;
  double V_at(int k, int m, Index i) const { return V[(static_cast<std::size_t>(k) * M + m) * d + i]; }
};

/// Exact lattice value by value iteration per node, written independently of
/// the projection code used by solve().
OracleField dp_oracle(const ControlledTransitionModel& model, const Driver& driver, const Lattice& lattice);

struct ModeReport {
  Index mode = 0;
  double Y = 0.0;
  RewardEstimate optimal;
  bool optimalPass = false;
  std::vector<RewardEstimate> baselines;
  bool baselinesPass = false;
  RewardEstimate neverSwitch;
};

struct RepresentationReport {
  std::vector<ModeReport> modes;
  bool passed = false;
  std::uint64_t seed = 0;
  int paths = 0;
  std::string to_text() const;
};

RepresentationReport verify_representation(const ControlledTransitionModel& model, const Driver& driver,
                                           const Lattice& lattice, int paths, std::uint64_t seed,
                                           int baselineCount = 20);

void write_trace_csv(std::ostream& os, const StrategyTrace& trace);

}  // namespace oswitch
