#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cclab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cclab — coupling and exceedance experiments"};
  cclab::ExperimentConfig cfg;

  std::string experiment;
  app.add_option("experiment", experiment, "one of: dkw, upper, lower, sandwich")->required();
  app.add_option("--n", cfg.n, "vector dimension");
  app.add_option("--k", cfg.k_values, "arity (comma list for sandwich)")->delimiter(',');
  app.add_option("--d", cfg.d, "number of permutations / coupling arity");
  app.add_option("--rho-grid", cfg.rho_grid, "quantile shifts, comma separated")->delimiter(',');
  std::string delta = "auto";
  app.add_option("--delta", delta, "Wasserstein radius, or 'auto' for 3 log(n)/sqrt(n)");
  app.add_option("--samples", cfg.samples, "Monte Carlo samples / trials");
  app.add_option("--seed", cfg.seed, "RNG seed (CCLAB_SEED environment variable wins)");
  app.add_option("--threads", cfg.threads, "worker threads; 1 is bit-reproducible");
  app.add_option("--out", cfg.out, "report path (default: stdout)");
  app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  cfg.experiment = experiment;
  if (delta != "auto") {
    try {
      cfg.delta = std::stod(delta);
    } catch (const std::exception&) {
      std::cerr << "cclab: --delta must be a number or 'auto'\n";
      return 3;
    }
  }
  if (const char* env = std::getenv("CCLAB_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "cclab: CCLAB_SEED must be an unsigned integer\n";
      return 3;
    }
  }
  try {
    return cclab::run_experiment(cfg);
  } catch (const std::exception& e) {
    std::cerr << "cclab: internal error: " << e.what() << "\n";
    return 1;
  }
}
