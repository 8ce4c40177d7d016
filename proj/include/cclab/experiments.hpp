#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cclab/measures.hpp"

namespace cclab {

inline constexpr const char* kVersion = "0.1.0";

// Reproducible command-line experiments composing the other modules. Each
// experiment returns a JSON report with a stable schema:
//   experiment, version, params, rows[], margins[], pass, wall_clock_ms
// where every asserted inequality appears in margins[] with its margin.
// With a fixed seed and threads = 1 the numeric fields are byte-identical
// across reruns (wall_clock_ms is the only unstable field).

struct ExperimentConfig {
  std::string experiment;
  long long n = 10000;
  std::vector<int> k_values;  // experiments needing one k use the front
  int d = 16;
  std::vector<double> rho_grid;  // empty: geometric default in [0.005, p1/4]
  std::optional<double> delta;   // empty: 3 log(n)/sqrt(n)
  long long samples = 2000;
  std::uint64_t seed = 12345;
  int threads = 1;
  std::string out;  // empty: stdout
  std::string format = "json";

  int k() const { return k_values.empty() ? 2 : k_values.front(); }
};

/// Geometric grid of candidate quantile shifts in [0.005, p1/4].
std::vector<double> default_rho_grid();

/// Gaussian-mass experiment: estimates the mass of Gamma_n and E_n(delta),
/// counts DKW failures against the per-sample bound 2/n^2, and checks the
/// samplewise inclusion Gamma_n subset of E_n(delta).
nlohmann::json exp_dkw(const ExperimentConfig& cfg);

/// Upper-bound experiment on k-fold convex combinations: random combinations
/// of near-Gaussian vectors never exceed conv_exceedance_bound(k, delta),
/// plus an adversarial variant averaging block-aligned reorderings of a
/// quantile grid to push the exceedance up.
nlohmann::json exp_upper(const ExperimentConfig& cfg);

/// Constructive lower pipeline: t = Gaussian quantile grid, B = top block of
/// size round((p1 - rho) n), d permutations uniform on S_n(B); reports the
/// exceedance of the averaged vector against the exact-rate floor, mean
/// preservation, and the first-moment ceiling.
nlohmann::json exp_lower(const ExperimentConfig& cfg);

/// The exceedance-supremum sandwich table: per k, the exact refined
/// certificate bound at equal weights against the best box-product Monte
/// Carlo estimate (d = k) over the rho grid with its analytic floor.
nlohmann::json exp_sandwich(const ExperimentConfig& cfg);

// Exhaustive reordering counts for n <= 8: N(t, J) over all n! reorderings
// and N_B(t, J) for every block B of size m, which tile N exactly.
struct ReorderingCounts {
  long long total = 0;  // N(t, J)
  std::map<std::vector<std::int32_t>, long long> per_block;

  long long max_block_count() const;
};

ReorderingCounts oracle_reordering_counts(
    const SortedSample& t, const std::function<bool(std::span<const double>)>& J, int m);

/// Dispatches on cfg.experiment, writes the report atomically (file given by
/// cfg.out; stdout when empty; suppressed when "none"). Exit codes: 0 pass,
/// 2 bound violation, 3 config error, 4 I/O error.
int run_experiment(const ExperimentConfig& cfg);

/// Same, but also hands back the report (for in-process callers and tests).
int run_experiment(const ExperimentConfig& cfg, nlohmann::json* report_out);

}  // namespace cclab
