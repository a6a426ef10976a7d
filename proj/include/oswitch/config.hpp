#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "oswitch/lattice.hpp"
#include "oswitch/model.hpp"

namespace oswitch {

/// Problem definition with every default filled in. `doc` is the canonical
/// form: emit(parse(text)) is a fixed point of parse/emit.
struct ProblemConfig {
  nlohmann::json doc;
  std::string source;

  bool has(const std::string& block) const { return doc.contains(block); }
};

struct RunConfig {
  std::uint64_t seed = 1;
  int paths = 10000;
  int baselines = 20;
  int samples = 1000;
  int resolution = 180;
  int refine = 0;
  bool antithetic = false;
  std::optional<Vector> interiorPoint;
};

ProblemConfig parse_config(const std::string& text, const std::string& source = "<string>");
ProblemConfig load_config(const std::string& path);
std::string emit_config(const ProblemConfig& cfg);
/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ProblemConfig& cfg);

ControlledTransitionModel config_model(const ProblemConfig& cfg);
SdeParams config_sde(const ProblemConfig& cfg);
LatticeSpec config_lattice(const ProblemConfig& cfg);
Driver config_driver(const ProblemConfig& cfg);
RunConfig config_run(const ProblemConfig& cfg);

}  // namespace oswitch
