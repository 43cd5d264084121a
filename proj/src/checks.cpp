#include "driftbandit/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "driftbandit/bob.hpp"
#include "driftbandit/errors.hpp"
#include "driftbandit/estimator.hpp"
#include "driftbandit/harness.hpp"

namespace driftbandit {

namespace {

Eigen::VectorXd random_in_ball(int dim, double radius, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int k = 0; k < dim; ++k) v(k) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm() * radius * std::pow(unif(rng), 1.0 / dim);
}

// theta_1..theta_n with a mix of still and moving steps.
std::vector<Eigen::VectorXd> random_theta_path(int dim, std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double still_prob = unif(rng) < 0.2 ? 1.0 : unif(rng) * 0.7;
  const double scale = unif(rng) * 0.3;
  std::vector<Eigen::VectorXd> path{random_in_ball(dim, 1.0, rng)};
  for (std::size_t s = 1; s < n; ++s) {
    if (unif(rng) < still_prob)
      path.push_back(path.back());
    else
      path.push_back(path.back() + random_in_ball(dim, scale, rng));
  }
  return path;
}

Eigen::MatrixXd explicit_gram(const std::vector<Eigen::VectorXd>& xs, std::size_t begin, std::size_t end,
                              double lambda, int dim) {
  Eigen::MatrixXd v = lambda * Eigen::MatrixXd::Identity(dim, dim);
  for (std::size_t s = begin; s < end; ++s) v += xs[s] * xs[s].transpose();
  return v;
}

double path_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

constexpr std::array<double, 3> kLambdas{0.1, 1.0, 10.0};

EstimatorConfig check_config(int dim, std::int64_t window, double lambda) {
  EstimatorConfig cfg;
  cfg.dim = dim;
  cfg.window = window;
  cfg.lambda = lambda;
  cfg.noise_proxy = 0.0;
  cfg.action_bound = 1.0;
  cfg.param_bound = std::max(1.0, 1.0 / std::sqrt(lambda));
  cfg.delta = 1.0;
  return cfg;
}

}  // namespace

BiasReport check_bias_bound(std::size_t n_instances, Rng& rng) {
  BiasReport report;
  std::uniform_int_distribution<int> pick_dim(1, 5);
  std::uniform_int_distribution<std::int64_t> pick_window(1, 50);
  std::uniform_int_distribution<std::size_t> pick_lambda(0, kLambdas.size() - 1);
  for (std::size_t n = 0; n < n_instances; ++n) {
    const int d = pick_dim(rng);
    const std::int64_t w = pick_window(rng);
    const double lambda = kLambdas[pick_lambda(rng)];
    // Round t (1-based) sees observations max(1, t-w)..t-1.
    const auto t = std::uniform_int_distribution<std::int64_t>(1, 2 * w + 1)(rng);
    const auto theta = random_theta_path(d, static_cast<std::size_t>(t), rng);
    std::vector<Eigen::VectorXd> xs;
    for (std::int64_t s = 1; s < t; ++s) xs.push_back(random_in_ball(d, 1.0, rng));

    const std::size_t first = static_cast<std::size_t>(std::max<std::int64_t>(1, t - w)) - 1;
    const std::size_t last = static_cast<std::size_t>(t) - 1;  // exclusive, 0-based
    const auto& theta_t = theta[last];

    // Estimator path: regress on y_s = x_s^T (theta_s - theta_t); theta_hat is then the bias vector.
    SlidingWindowEstimator est(check_config(d, w, lambda));
    for (std::size_t s = 0; s < xs.size(); ++s)
      est.push(xs[s], xs[s].dot(theta[s] - theta_t), static_cast<std::int64_t>(s));
    const double lhs_impl = est.estimate().norm();

    // Explicit path.
    const Eigen::MatrixXd v_inv = explicit_gram(xs, first, last, lambda, d).inverse();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    for (std::size_t s = first; s < last; ++s) acc += xs[s] * xs[s].dot(theta[s] - theta_t);
    const double lhs_oracle = (v_inv * acc).norm();

    double rhs = 0.0;
    for (std::size_t s = first; s < last; ++s) rhs += (theta[s] - theta[s + 1]).norm();

    const double excess = std::max(lhs_impl, lhs_oracle) - rhs;
    report.max_excess = std::max(report.max_excess, excess);
    report.max_path_gap = std::max(report.max_path_gap, path_gap(lhs_impl, lhs_oracle));
    if (excess > kInequalityTolerance) ++report.violations;
    ++report.instances;
  }
  return report;
}

DeviationReport check_deviation_bound(const DeviationOptions& opts, Rng& rng) {
  if (opts.round < 1 || opts.window < 1 || opts.dim < 1 || opts.num_actions < 1)
    throw DomainError("deviation check: sizes must be positive");
  EstimatorConfig cfg;
  cfg.dim = opts.dim;
  cfg.window = opts.window;
  cfg.lambda = opts.lambda;
  cfg.noise_proxy = opts.noise_sd;
  cfg.action_bound = 1.0;
  cfg.param_bound = std::max(1.0, 1.0 / std::sqrt(opts.lambda));
  cfg.delta = opts.delta;
  const double beta = confidence_radius(cfg);

  // Fixed instance: a drifting path inside the unit ball, actions in the unit ball.
  const auto t = static_cast<std::size_t>(opts.round);
  std::vector<Eigen::VectorXd> theta{random_in_ball(opts.dim, 0.5, rng)};
  for (std::size_t s = 1; s < t; ++s) theta.push_back(theta.back() + random_in_ball(opts.dim, 0.01, rng));
  std::vector<Eigen::VectorXd> xs;
  for (std::size_t s = 1; s < t; ++s) xs.push_back(random_in_ball(opts.dim, 1.0, rng));
  Eigen::MatrixXd decision(opts.dim, opts.num_actions);
  for (int k = 0; k < opts.num_actions; ++k) decision.col(k) = random_in_ball(opts.dim, 1.0, rng);

  const std::size_t first = static_cast<std::size_t>(std::max<std::int64_t>(1, opts.round - opts.window)) - 1;
  const std::size_t last = t - 1;
  double drift = 0.0;
  for (std::size_t s = first; s < last; ++s) drift += (theta[s] - theta[s + 1]).norm();
  const auto& theta_t = theta[last];

  DeviationReport report;
  report.delta = opts.delta;
  NoiseModel noise{opts.noise_sd};
  SlidingWindowEstimator est(cfg);
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    est.clear();
    for (std::size_t s = 0; s < xs.size(); ++s)
      est.push(xs[s], xs[s].dot(theta[s]) + noise.sample(rng), static_cast<std::int64_t>(s));
    const auto snap = est.snapshot();
    const Eigen::VectorXd err = snap.theta_hat() - theta_t;
    bool violated = false;
    for (int k = 0; k < opts.num_actions && !violated; ++k) {
      const auto x = decision.col(k);
      const double bound = cfg.action_bound * drift + beta * snap.matrix_norm(x);
      violated = std::abs(x.dot(err)) > bound;
    }
    if (violated) ++report.violations;
    ++report.trials;
  }
  return report;
}

MonotonicityReport check_norm_monotonicity(std::size_t n_instances, Rng& rng) {
  MonotonicityReport report;
  std::uniform_int_distribution<int> pick_dim(1, 5);
  std::uniform_int_distribution<std::int64_t> pick_window(1, 50);
  std::uniform_int_distribution<std::size_t> pick_lambda(0, kLambdas.size() - 1);
  std::uniform_int_distribution<std::int64_t> pick_piece(0, 3);
  for (std::size_t n = 0; n < n_instances; ++n) {
    const int d = pick_dim(rng);
    const std::int64_t w = pick_window(rng);
    const double lambda = kLambdas[pick_lambda(rng)];
    const std::int64_t piece = pick_piece(rng);
    const auto total = static_cast<std::size_t>((piece + 1) * w);
    std::vector<Eigen::VectorXd> xs;
    for (std::size_t s = 0; s < total; ++s) xs.push_back(random_in_ball(d, 1.0, rng));

    const auto cfg = check_config(d, w, lambda);
    SlidingWindowEstimator windowed(cfg);
    SlidingWindowEstimator block(cfg);
    const auto piece_start = static_cast<std::size_t>(piece * w);
    for (std::size_t s = 0; s < piece_start; ++s) windowed.push(xs[s], 0.0, static_cast<std::int64_t>(s));

    double sum_windowed = 0.0, sum_block = 0.0;
    for (std::size_t s = piece_start; s < total; ++s) {
      // Round s+1 (1-based): windowed Gram over max(1, s+1-w)..s, block Gram over piece_start+1..s.
      const double impl_w = std::pow(windowed.matrix_norm(xs[s]), 2);
      const double impl_b = std::pow(block.matrix_norm(xs[s]), 2);
      const std::size_t first = s >= static_cast<std::size_t>(w) ? s - static_cast<std::size_t>(w) : 0;
      const double oracle_w = xs[s].dot(explicit_gram(xs, first, s, lambda, d).inverse() * xs[s]);
      const double oracle_b = xs[s].dot(explicit_gram(xs, piece_start, s, lambda, d).inverse() * xs[s]);
      report.max_path_gap =
          std::max({report.max_path_gap, path_gap(impl_w, oracle_w), path_gap(impl_b, oracle_b)});
      const double excess = std::max(impl_w, oracle_w) - std::min(impl_b, oracle_b);
      report.max_excess = std::max(report.max_excess, excess);
      if (excess > kInequalityTolerance) ++report.violations;
      sum_windowed += std::min(1.0, impl_w);
      sum_block += std::min(1.0, impl_b);
      ++report.terms;
      windowed.push(xs[s], 0.0, static_cast<std::int64_t>(s));
      block.push(xs[s], 0.0, static_cast<std::int64_t>(s));
    }
    if (sum_windowed - sum_block > kInequalityTolerance) ++report.violations;
    ++report.instances;
  }
  return report;
}

BlockRewardReport check_block_reward_bound(const EnvironmentSpec& env_spec, std::int64_t horizon,
                                           std::size_t n_runs, std::uint64_t master_seed) {
  BlockRewardReport report;
  report.allowed_frequency = 2.0 / static_cast<double>(horizon);
  const SeedPlan plan{master_seed};
  BobOptions opts;
  opts.ucb.noise_proxy = env_spec.noise_sd;
  for (std::size_t run = 0; run < n_runs; ++run) {
    Rng env_rng(derive_seed(plan.environment(horizon, run), {env_spec.seed}));
    const auto env = env_spec.build(horizon, env_rng);
    BobPolicy bob(opts);
    run_episode_final(env, bob, EpisodeSeeds{plan.noise(horizon, run), plan.policy(horizon, run)});
    report.threshold = block_reward_threshold(bob.schedule().block_length, horizon, env_spec.noise_sd);
    bool exceeded = false;
    for (const auto& blk : bob.blocks()) {
      const double mag = std::abs(blk.reward_sum);
      report.max_abs_block_reward = std::max(report.max_abs_block_reward, mag);
      if (mag > report.threshold) {
        ++report.exceedances;
        exceeded = true;
      }
      ++report.blocks;
    }
    if (exceeded) ++report.runs_with_exceedance;
    ++report.runs;
  }
  return report;
}

}  // namespace driftbandit
