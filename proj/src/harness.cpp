#include "driftbandit/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "driftbandit/errors.hpp"
#include "driftbandit/format.hpp"
#include "driftbandit/rng.hpp"

namespace driftbandit {

namespace {

template <typename OnRound>
void episode_loop(const DriftingEnvironment& env, Policy& policy, EpisodeSeeds seeds, OnRound&& on_round) {
  if (const auto d = policy.fixed_dim(); d && *d != env.dim())
    throw ConfigError("episode: policy expects d = " + std::to_string(*d) + ", environment has d = " +
                      std::to_string(env.dim()));
  policy.reset(EpisodeContext{env.horizon(), env.dim(), seeds.policy});
  Rng noise(seeds.noise);
  Eigen::VectorXd means;
  for (std::int64_t t = 0; t < env.horizon(); ++t) {
    const auto& actions = env.decision_set(t);
    const std::size_t k = policy.choose(actions);
    const double y = env.reward(t, actions.col(static_cast<Eigen::Index>(k)), noise);
    policy.observe(k, y);
    means.noalias() = actions.transpose() * env.theta(t);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < means.size(); ++j)
      if (means(j) > means(best)) best = j;
    // Both terms come from the same products, so the gap is exactly >= 0.
    on_round(k, y, means(best) - means(static_cast<Eigen::Index>(k)));
  }
}

}  // namespace

RegretTrace run_episode(const DriftingEnvironment& env, Policy& policy, EpisodeSeeds seeds) {
  RegretTrace trace;
  trace.env_seed = seeds.noise;
  trace.policy_seed = seeds.policy;
  const auto n = static_cast<std::size_t>(env.horizon());
  trace.action.reserve(n);
  trace.reward.reserve(n);
  trace.instant_regret.reserve(n);
  trace.cumulative_regret.reserve(n);
  double cum = 0.0;
  episode_loop(env, policy, seeds, [&](std::size_t k, double y, double regret) {
    cum += regret;
    trace.action.push_back(static_cast<std::uint32_t>(k));
    trace.reward.push_back(y);
    trace.instant_regret.push_back(regret);
    trace.cumulative_regret.push_back(cum);
  });
  return trace;
}

double run_episode_final(const DriftingEnvironment& env, Policy& policy, EpisodeSeeds seeds) {
  double cum = 0.0;
  episode_loop(env, policy, seeds, [&](std::size_t, double, double regret) { cum += regret; });
  return cum;
}

void write_trace_csv(const RegretTrace& trace, std::ostream& out) {
  out << "t,action,reward,inst_regret,cum_regret\n";
  for (std::size_t i = 0; i < trace.action.size(); ++i) {
    out << (i + 1) << ',' << trace.action[i] << ',' << format_double(trace.reward[i]) << ','
        << format_double(trace.instant_regret[i]) << ',' << format_double(trace.cumulative_regret[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------

std::uint64_t SeedPlan::environment(std::int64_t horizon, std::size_t index) const {
  return derive_seed(master, {1, static_cast<std::uint64_t>(horizon), index});
}

std::uint64_t SeedPlan::noise(std::int64_t horizon, std::size_t index) const {
  return derive_seed(master, {2, static_cast<std::uint64_t>(horizon), index});
}

std::uint64_t SeedPlan::policy(std::int64_t horizon, std::size_t index) const {
  return derive_seed(master, {3, static_cast<std::uint64_t>(horizon), index});
}

std::vector<const SweepRow*> SweepResult::rows_for(const std::string& policy) const {
  std::vector<const SweepRow*> out;
  for (const auto& r : rows)
    if (r.policy == policy) out.push_back(&r);
  return out;
}

std::pair<double, double> mean_and_std_error(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("mean_and_std_error: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(workers, count);
    for (std::size_t w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace {

struct Job {
  std::size_t row;
  std::size_t policy;
  std::int64_t horizon;
  std::size_t seed_index;
};

double run_job(const EnvironmentSpec& env_spec, const NamedPolicy& policy, std::int64_t horizon, std::size_t seed_index, const SeedPlan& plan) {
  Rng env_rng(derive_seed(plan.environment(horizon, seed_index), {env_spec.seed}));
  const auto env = env_spec.build(horizon, env_rng);
  auto p = policy.make(env);
  return run_episode_final(env, *p, EpisodeSeeds{plan.noise(horizon, seed_index),
                                                 plan.policy(horizon, seed_index)});
}

}  // namespace

SweepResult run_sweep(const EnvironmentSpec& env_spec, const std::vector<NamedPolicy>& policies,
                      const SweepOptions& opts) {
  if (opts.seeds == 0) throw ConfigError("sweep: need at least one seed");
  if (opts.horizons.empty()) throw ConfigError("sweep: empty horizon grid");
  env_spec.validate();
  SweepResult result;
  result.master_seed = opts.master_seed;
  std::vector<Job> jobs;
  for (auto horizon : opts.horizons) {
    for (std::size_t p = 0; p < policies.size(); ++p) {
      SweepRow row;
      row.policy = policies[p].name;
      row.horizon = horizon;
      row.finals.assign(opts.seeds, 0.0);
      for (std::size_t s = 0; s < opts.seeds; ++s) jobs.push_back(Job{result.rows.size(), p, horizon, s});
      result.rows.push_back(std::move(row));
    }
  }
  const SeedPlan plan{opts.master_seed};
  parallel_for(jobs.size(), opts.workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    result.rows[job.row].finals[job.seed_index] =
        run_job(env_spec, policies[job.policy], job.horizon, job.seed_index, plan);
  });
  for (auto& row : result.rows) std::tie(row.mean, row.std_error) = mean_and_std_error(row.finals);
  return result;
}

SweepRow replicate(const EnvironmentSpec& env_spec, const NamedPolicy& policy, std::int64_t horizon,
                   std::size_t n_seeds, std::uint64_t master_seed, unsigned workers) {
  SweepOptions opts;
  opts.horizons = {horizon};
  opts.seeds = n_seeds;
  opts.master_seed = master_seed;
  opts.workers = workers;
  return run_sweep(env_spec, {policy}, opts).rows.front();
}

void write_final_regret_csv(const SweepResult& result, std::ostream& out) {
  out << "policy,T,seed,final_regret\n";
  for (const auto& row : result.rows)
    for (std::size_t s = 0; s < row.finals.size(); ++s)
      out << row.policy << ',' << row.horizon << ',' << s << ',' << format_double(row.finals[s]) << '\n';
}

SlopeFit loglog_slope(const std::vector<double>& horizons, const std::vector<double>& regrets) {
  if (horizons.size() != regrets.size()) throw DomainError("loglog_slope: size mismatch");
  if (horizons.size() < 2) throw DomainError("loglog_slope: need at least two points");
  const double n = static_cast<double>(horizons.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0) || !(regrets[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    xs.push_back(std::log(horizons[i]));
    ys.push_back(std::log(regrets[i]));
    sx += xs.back();
    sy += ys.back();
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DomainError("loglog_slope: horizons must differ");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  fit.points = xs.size();
  return fit;
}

SlopeFit loglog_slope(const std::vector<const SweepRow*>& rows) {
  std::vector<double> hs, rs;
  for (const auto* r : rows) {
    hs.push_back(static_cast<double>(r->horizon));
    rs.push_back(r->mean);
  }
  return loglog_slope(hs, rs);
}

}  // namespace driftbandit
