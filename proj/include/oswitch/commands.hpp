#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "oswitch/config.hpp"
#include "oswitch/reflection.hpp"

namespace oswitch {

struct CommandOptions {
  std::string configPath;
  std::optional<std::uint64_t> seed;          // overrides run.seed
  std::string outDir;                         // empty: no files written
  std::optional<Construction> construction;   // build-h only
  std::optional<int> refine;                  // solve only; overrides run.refine
};

Construction parse_construction(const std::string& name);

// Each command prints a human report to `out` and returns the process exit
// code. Library errors propagate as oswitch::Error.
int cmd_domain(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_build_h(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_solve(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out);
/// 0 iff every mode passes, 1 otherwise.
int cmd_verify(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_polygon(const ProblemConfig& cfg, const CommandOptions& opt, std::ostream& out);

/// Dispatches by command name; unknown names are a ConfigError.
int run_command(const std::string& name, const CommandOptions& opt, std::ostream& out);

}  // namespace oswitch
