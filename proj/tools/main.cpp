#include <iostream>

#include <CLI11.hpp>

#include "oswitch/commands.hpp"
#include "oswitch/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Switching problems with controlled randomisation: domain geometry, reflection operators, "
               "reflected BSDE lattice solver and strategy simulation.\n"
               "Worker threads: OSWITCH_THREADS (default: hardware concurrency)."};
  app.require_subcommand(1);

  oswitch::CommandOptions opt;
  std::uint64_t seed = 0;
  std::string construction;
  int refine = 0;

  const char* names[] = {"domain", "build-h", "solve", "verify", "polygon"};
  const char* help[] = {"non-emptiness certificate, invariant measure, excursion costs, slice vertices",
                        "reflection operator field and its certificate",
                        "lattice solution of the reflected BSDE",
                        "Monte Carlo check of the optimal-strategy representation (exit 1 if a mode fails)",
                        "boundary points of the 3-state slice"};
  for (int k = 0; k < 5; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], help[k]);
    sub->add_option("--config", opt.configPath, "problem definition (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "overrides run.seed");
    sub->add_option("--out", opt.outDir, "directory for machine-readable outputs");
    sub->add_option("--construction", construction, "markovian|dim3|symmetric|controlled-dim3");
    sub->add_option("--refine", refine, "number of step doublings for the convergence table");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(oswitch::ErrorKind::config);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--refine")) opt.refine = refine;
    if (sub->count("--construction")) opt.construction = oswitch::parse_construction(construction);
    return oswitch::run_command(sub->get_name(), opt, std::cout);
  } catch (const oswitch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
