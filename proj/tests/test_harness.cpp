#include <doctest.h>

#include <cmath>
#include <sstream>

#include "driftbandit/errors.hpp"
#include "driftbandit/harness.hpp"

using namespace driftbandit;

namespace {

// Reads theta only to build a perfect test double; real policies never see it.
class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(const DriftingEnvironment& env) : env_(env) {}
  std::string name() const override { return "oracle"; }

 protected:
  void do_reset(const EpisodeContext&) override { t_ = 0; }
  std::size_t do_choose(const DecisionSet&) override { return env_.best_action_index(t_); }
  void do_observe(const Eigen::Ref<const Eigen::VectorXd>&, std::size_t, double) override { ++t_; }

 private:
  const DriftingEnvironment& env_;
  std::int64_t t_ = 0;
};

NamedPolicy swucb_known() {
  return {"sw-ucb", [](const DriftingEnvironment& env) -> std::unique_ptr<Policy> {
            SwUcbOptions o;
            o.rule = WindowRule::kKnownBudget;
            o.budget = env.nominal_budget();
            o.ucb.noise_proxy = env.noise().sd;
            return std::make_unique<SwUcbPolicy>(o);
          }};
}

NamedPolicy uniform() {
  return {"uniform", [](const DriftingEnvironment&) -> std::unique_ptr<Policy> {
            return std::make_unique<UniformRandomPolicy>();
          }};
}

}  // namespace

TEST_CASE("singleton decision set has zero regret") {
  Eigen::MatrixXd th = Eigen::Vector2d(0.3, 0.1).replicate(1, 200);
  DriftingEnvironment env(th, {Eigen::MatrixXd(Eigen::Vector2d(1, 0))}, 200, NoiseModel{0.1}, 0.0, 0.0);
  UniformRandomPolicy p;
  const auto tr = run_episode(env, p, EpisodeSeeds{1, 2});
  CHECK(tr.final_regret() == 0.0);
  CHECK(tr.action.size() == 200);
}

TEST_CASE("oracle double has zero regret") {
  const auto env = make_sinusoidal(5000, 2.0, 0.1);
  OraclePolicy p(env);
  CHECK(run_episode(env, p, EpisodeSeeds{1, 1}).final_regret() == 0.0);
}

TEST_CASE("dimension mismatch") {
  const auto env = make_sinusoidal(10, 1.0, 0.1);
  class ThreeD final : public Policy {
   public:
    std::string name() const override { return "3d"; }
    std::optional<int> fixed_dim() const override { return 3; }

   protected:
    void do_reset(const EpisodeContext&) override {}
    std::size_t do_choose(const DecisionSet&) override { return 0; }
    void do_observe(const Eigen::Ref<const Eigen::VectorXd>&, std::size_t, double) override {}
  } p;
  CHECK_THROWS_AS(run_episode(env, p, EpisodeSeeds{}), ConfigError);
  CHECK_THROWS_AS(run_episode_final(env, p, EpisodeSeeds{}), ConfigError);
  p.reset(EpisodeContext{10, 3, 0});
  CHECK_THROWS_AS(p.choose(env.decision_set(0)), ConfigError);
}

TEST_CASE("trace invariants") {
  const auto env = make_sinusoidal(20000, 1.0, 0.1);
  SwUcbOptions o;
  o.rule = WindowRule::kKnownBudget;
  o.budget = 1.0;
  SwUcbPolicy p(o);
  const auto tr = run_episode(env, p, EpisodeSeeds{3, 4});
  double cum = 0.0;
  for (std::size_t t = 0; t < tr.action.size(); ++t) {
    REQUIRE(tr.instant_regret[t] >= 0.0);
    cum += tr.instant_regret[t];
    REQUIRE(tr.cumulative_regret[t] == cum);
    const double gap = env.theta(static_cast<std::int64_t>(t)).maxCoeff() - env.theta(static_cast<std::int64_t>(t))(tr.action[t]);
    REQUIRE(std::abs(tr.instant_regret[t] - gap) <= 1e-15);
  }
  SwUcbPolicy again(o);
  CHECK(run_episode_final(env, again, EpisodeSeeds{3, 4}) == tr.final_regret());
}

TEST_CASE("sw-ucb episode equals a straight-line reimplementation") {
  // Two arms, stationary, no noise: V stays diagonal, so the reference keeps counts.
  const Eigen::Vector2d theta(0.7, 0.4);
  Eigen::MatrixXd th = theta.replicate(1, 100);
  DriftingEnvironment env(th, {Eigen::Matrix2d::Identity()}, 100, NoiseModel{0.0}, 0.0, 0.0);
  for (std::int64_t w : {1, 3, 10, 100}) {
    SwUcbOptions o;
    o.rule = WindowRule::kFixed;
    o.window = w;
    o.ucb.noise_proxy = 0.0;
    SwUcbPolicy p(o);
    const auto tr = run_episode(env, p, EpisodeSeeds{0, 0});

    std::vector<std::uint32_t> ref;
    std::vector<int> hist;
    double cum = 0.0;
    for (int t = 0; t < 100; ++t) {
      double n[2] = {1.0, 1.0}, b[2] = {0.0, 0.0};
      const std::size_t lo = hist.size() > static_cast<std::size_t>(w) ? hist.size() - static_cast<std::size_t>(w) : 0;
      for (std::size_t s = lo; s < hist.size(); ++s) {
        n[hist[s]] += 1.0;
        b[hist[s]] += theta(hist[s]);
      }
      // beta = sqrt(lambda) S = 1 when R = 0
      const double s0 = b[0] / n[0] + 1.0 / std::sqrt(n[0]);
      const double s1 = b[1] / n[1] + 1.0 / std::sqrt(n[1]);
      const int k = s1 > s0 ? 1 : 0;
      ref.push_back(static_cast<std::uint32_t>(k));
      hist.push_back(k);
      cum += theta.maxCoeff() - theta(k);
    }
    CHECK(tr.action == ref);
    CHECK(tr.final_regret() == doctest::Approx(cum).epsilon(1e-15));
  }
}

TEST_CASE("replicate") {
  EnvironmentSpec spec;
  spec.noise_sd = 0.1;
  SUBCASE("one seed") {
    const auto row = replicate(spec, swucb_known(), 2000, 1, 7);
    CHECK(row.mean == row.finals[0]);
    CHECK(row.std_error == 0.0);
  }
  SUBCASE("deterministic environment and policy") {
    auto quiet = spec;
    quiet.noise_sd = 0.0;
    const auto row = replicate(quiet, swucb_known(), 2000, 5, 7);
    for (double v : row.finals) CHECK(v == row.finals[0]);
    CHECK(row.std_error <= 1e-12);
  }
  SUBCASE("rerun is bit exact") {
    const auto a = replicate(spec, swucb_known(), 3000, 20, 11);
    const auto b = replicate(spec, swucb_known(), 3000, 20, 11);
    CHECK(a.finals == b.finals);
    CHECK(a.mean == b.mean);
    const auto c = replicate(spec, swucb_known(), 3000, 20, 12);
    CHECK(a.finals != c.finals);
  }
  SUBCASE("mean is the average of the finals") {
    const auto row = replicate(spec, uniform(), 500, 9, 3);
    double s = 0.0;
    for (double v : row.finals) s += v;
    CHECK(row.mean == doctest::Approx(s / 9).epsilon(1e-15));
  }
}

TEST_CASE("sweep is schedule invariant") {
  EnvironmentSpec spec;
  spec.kind = ThetaProcess::kBudgetedRandomWalk;
  spec.dim = 3;
  spec.budget = 2.0;
  SweepOptions opts;
  opts.horizons = {500, 1000};
  opts.seeds = 6;
  opts.master_seed = 99;
  opts.workers = 1;
  const auto serial = run_sweep(spec, {swucb_known(), uniform()}, opts);
  opts.workers = 4;
  const auto parallel = run_sweep(spec, {swucb_known(), uniform()}, opts);
  REQUIRE(serial.rows.size() == 4);
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].policy == parallel.rows[i].policy);
    CHECK(serial.rows[i].horizon == parallel.rows[i].horizon);
    CHECK(serial.rows[i].finals == parallel.rows[i].finals);
  }
  CHECK(serial.rows_for("uniform").size() == 2);
}

TEST_CASE("sweep errors propagate") {
  EnvironmentSpec spec;
  SweepOptions opts;
  opts.horizons = {100};
  NamedPolicy broken{"broken", [](const DriftingEnvironment&) -> std::unique_ptr<Policy> {
                       throw DomainError("nope");
                     }};
  opts.workers = 3;
  CHECK_THROWS_AS(run_sweep(spec, {broken}, opts), DomainError);
  opts.seeds = 0;
  CHECK_THROWS_AS(run_sweep(spec, {broken}, opts), ConfigError);
}

TEST_CASE("log-log slope") {
  std::vector<double> ts, lin, twothirds;
  for (int i = 1; i <= 8; ++i) {
    ts.push_back(30000.0 * i);
    lin.push_back(3.7 * ts.back());
    twothirds.push_back(0.2 * std::pow(ts.back(), 2.0 / 3.0));
  }
  CHECK(std::abs(loglog_slope(ts, lin).slope - 1.0) <= 1e-12);
  CHECK(std::abs(loglog_slope(ts, twothirds).slope - 2.0 / 3.0) <= 1e-12);
  CHECK(loglog_slope(ts, lin).residual_rms <= 1e-12);
  CHECK(std::exp(loglog_slope(ts, lin).intercept) == doctest::Approx(3.7));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), DomainError);
  CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(loglog_slope({2.0, 2.0}, {1.0, 3.0}), DomainError);

  SweepRow a, b;
  a.horizon = 100;
  a.mean = 10;
  b.horizon = 800;
  b.mean = 40;
  CHECK(loglog_slope({&a, &b}).slope == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("mean and standard error") {
  const auto [m, se] = mean_and_std_error({1.0, 2.0, 3.0, 4.0});
  CHECK(m == 2.5);
  CHECK(se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK_THROWS_AS(mean_and_std_error({}), DomainError);
}

TEST_CASE("csv output") {
  const auto env = make_sinusoidal(3, 1.0, 0.0);
  UniformRandomPolicy p;
  const auto tr = run_episode(env, p, EpisodeSeeds{0, 0});
  std::ostringstream out;
  write_trace_csv(tr, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,action,reward,inst_regret,cum_regret");
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    CHECK(line.find(' ') == std::string::npos);
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(n == 3);

  SweepResult r;
  SweepRow row;
  row.policy = "p";
  row.horizon = 30000;
  row.finals = {0.1, 1234567.5};
  r.rows.push_back(row);
  std::ostringstream csv;
  write_final_regret_csv(r, csv);
  CHECK(csv.str() == "policy,T,seed,final_regret\np,30000,0,0.1\np,30000,1,1234567.5\n");
}

TEST_CASE("seed plan streams are distinct") {
  const SeedPlan plan{5};
  CHECK(plan.environment(100, 0) != plan.noise(100, 0));
  CHECK(plan.noise(100, 0) != plan.policy(100, 0));
  CHECK(plan.policy(100, 0) != plan.policy(100, 1));
  CHECK(plan.noise(100, 0) != plan.noise(200, 0));
  CHECK(plan.noise(100, 0) == SeedPlan{5}.noise(100, 0));
}
