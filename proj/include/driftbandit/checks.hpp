#pragma once

#include <cstdint>
#include <string>

#include "driftbandit/environment.hpp"
#include "driftbandit/rng.hpp"

namespace driftbandit {

// Executable versions of the estimator's analytic guarantees. Each suite
// evaluates one side through SlidingWindowEstimator and the other with
// explicit dense inverses, and reports both the inequality slack and the
// disagreement between the two evaluation paths.

// Absolute slack tolerated on an inequality and on path disagreement.
inline constexpr double kInequalityTolerance = 1e-9;
inline constexpr double kPathTolerance = 1e-8;

// Drift bias: ||V^{-1} sum_s x_s x_s^T (theta_s - theta_t)|| <= sum_s ||theta_s - theta_{s+1}||.
struct BiasReport {
  std::size_t instances = 0;
  std::size_t violations = 0;
  double max_excess = -1.0;  // max over instances of lhs - rhs
  double max_path_gap = 0.0;
  bool passed() const { return violations == 0 && max_path_gap <= kPathTolerance; }
};

// Random instances with d <= 5, w <= 50, lambda in {0.1, 1, 10}.
BiasReport check_bias_bound(std::size_t n_instances, Rng& rng);

// Deviation bound: with probability >= 1 - delta, for all x in D_t,
// |x^T (theta_hat_t - theta_t)| <= L sum_s ||theta_s - theta_{s+1}|| + beta ||x||_{V^{-1}}.
struct DeviationOptions {
  int dim = 3;
  std::int64_t window = 40;
  std::int64_t round = 60;  // t, 1-based; observations 1..t-1 are pushed
  double lambda = 1.0;
  double noise_sd = 0.1;
  double delta = 0.1;
  int num_actions = 8;
  std::size_t trials = 10000;
};

struct DeviationReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double delta = 0.0;
  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(trials); }
  bool passed() const { return rate() <= delta; }
};

// Fixes one drifting instance drawn from `rng`, then resamples the noise.
DeviationReport check_deviation_bound(const DeviationOptions& opts, Rng& rng);

// Windowed vs block-truncated Gram norms: ||x_t||^2_{V^{-1}} <= ||x_t||^2_{Vbar^{-1}}
// where Vbar holds only the observations since the start of the current
// length-w piece, and the same for the sums of min(1, .).
struct MonotonicityReport {
  std::size_t instances = 0;
  std::size_t terms = 0;
  std::size_t violations = 0;
  double max_excess = -1.0;
  double max_path_gap = 0.0;
  bool passed() const { return violations == 0 && max_path_gap <= kPathTolerance; }
};

MonotonicityReport check_norm_monotonicity(std::size_t n_instances, Rng& rng);

// Block reward magnitude under BOB: counts blocks with
// |sum of rewards| > H + 2R sqrt(H ln(T / sqrt(H))).
struct BlockRewardReport {
  std::size_t runs = 0;
  std::size_t blocks = 0;
  std::size_t exceedances = 0;
  std::size_t runs_with_exceedance = 0;
  double threshold = 0.0;
  double max_abs_block_reward = 0.0;
  double allowed_frequency = 0.0;  // 2/T per run
  bool passed() const { return exceedances == 0; }
};

BlockRewardReport check_block_reward_bound(const EnvironmentSpec& env_spec, std::int64_t horizon,
                                           std::size_t n_runs, std::uint64_t master_seed);

}  // namespace driftbandit
