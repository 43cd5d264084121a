#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "driftbandit/environment.hpp"
#include "driftbandit/policy.hpp"

namespace driftbandit {

// Per-round record of one episode. Rounds are 0-based in memory and 1-based in CSV.
struct RegretTrace {
  std::vector<std::uint32_t> action;
  std::vector<double> reward;
  std::vector<double> instant_regret;
  std::vector<double> cumulative_regret;
  std::uint64_t env_seed = 0;
  std::uint64_t policy_seed = 0;

  double final_regret() const { return cumulative_regret.empty() ? 0.0 : cumulative_regret.back(); }
};

struct EpisodeSeeds {
  std::uint64_t noise = 0;
  std::uint64_t policy = 0;
};

// choose -> reward -> observe for every round, scored against the true argmax.
// Throws ConfigError if the policy and environment dimensions differ.
RegretTrace run_episode(const DriftingEnvironment& env, Policy& policy, EpisodeSeeds seeds);

// Same loop without storing the trace; returns the final cumulative regret.
double run_episode_final(const DriftingEnvironment& env, Policy& policy, EpisodeSeeds seeds);

// CSV header "t,action,reward,inst_regret,cum_regret".
void write_trace_csv(const RegretTrace& trace, std::ostream& out);

// A policy builder: produces a fresh policy for an environment instance
// (known-budget rules read the instance's nominal budget).
using PolicyFactory = std::function<std::unique_ptr<Policy>(const DriftingEnvironment&)>;

struct NamedPolicy {
  std::string name;
  PolicyFactory make;
};

struct SweepRow {
  std::string policy;
  std::int64_t horizon = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> finals;  // indexed by seed index
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::uint64_t master_seed = 0;

  std::vector<const SweepRow*> rows_for(const std::string& policy) const;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

// Seeds for (horizon, seed index): environment generation, noise, and the policy's own
// randomness. Every policy in a sweep gets the same three streams, so results do not
// depend on the order policies are listed in.
struct SeedPlan {
  std::uint64_t master = 0;

  std::uint64_t environment(std::int64_t horizon, std::size_t index) const;
  std::uint64_t noise(std::int64_t horizon, std::size_t index) const;
  std::uint64_t policy(std::int64_t horizon, std::size_t index) const;
};

// Arithmetic mean and standard error (sample sd / sqrt(n); 0 when n = 1).
std::pair<double, double> mean_and_std_error(const std::vector<double>& values);

struct SweepOptions {
  std::vector<std::int64_t> horizons;
  std::size_t seeds = 20;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
};

// Runs every (horizon, policy, seed) episode; episodes are independent and may
// run on `workers` threads. Results are placed by index, so the output does not
// depend on scheduling.
SweepResult run_sweep(const EnvironmentSpec& env_spec, const std::vector<NamedPolicy>& policies,
                      const SweepOptions& opts);

// One row of a sweep: `n_seeds` episodes of one policy at one horizon.
SweepRow replicate(const EnvironmentSpec& env_spec, const NamedPolicy& policy, std::int64_t horizon,
                   std::size_t n_seeds, std::uint64_t master_seed, unsigned workers = 1);

// CSV header "policy,T,seed,final_regret"; one row per episode, seeds 0-based.
void write_final_regret_csv(const SweepResult& result, std::ostream& out);

// OLS of ln(mean regret) on ln(T) over the given rows.
SlopeFit loglog_slope(const std::vector<const SweepRow*>& rows);
SlopeFit loglog_slope(const std::vector<double>& horizons, const std::vector<double>& regrets);

// Runs `count` jobs on up to `workers` threads; job(i) must be independent.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job);

}  // namespace driftbandit
