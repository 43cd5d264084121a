#include <doctest.h>

#include <cmath>
#include <numbers>

#include "driftbandit/bob.hpp"
#include "driftbandit/errors.hpp"
#include "driftbandit/harness.hpp"

using namespace driftbandit;

TEST_CASE("bob schedule") {
  const auto s = bob_schedule(2, 30000, 0.1);
  CHECK(s.block_length == 274);
  CHECK(s.delta == 6);
  CHECK(s.windows == std::vector<std::int64_t>{1, 2, 6, 16, 42, 107, 274});
  CHECK(s.num_blocks() == 110);
  CHECK(s.gamma == doctest::Approx(0.26845214001882718).epsilon(1e-14));
  CHECK(s.q_cap == doctest::Approx(566.13573038370992).epsilon(1e-14));
  CHECK(bob_schedule(2, 240000, 0.1).block_length == 777);
  CHECK(bob_schedule(2, 10000, 0.1).block_length == 158);

  SUBCASE("J is nondecreasing within [1, H]") {
    for (std::int64_t t : {4, 9, 50, 1000, 123457}) {
      for (int d : {1, 2, 5}) {
        if (std::floor(std::pow(d, 2.0 / 3.0) * std::sqrt(static_cast<double>(t))) < 2) continue;
        const auto sc = bob_schedule(d, t, 0.1);
        REQUIRE(sc.windows.size() == static_cast<std::size_t>(sc.delta + 1));
        REQUIRE(sc.windows.front() == 1);
        REQUIRE(sc.windows.back() == sc.block_length);
        for (std::size_t j = 1; j < sc.windows.size(); ++j) REQUIRE(sc.windows[j] >= sc.windows[j - 1]);
        REQUIRE(sc.gamma > 0.0);
        REQUIRE(sc.gamma <= 1.0);
      }
    }
  }
  SUBCASE("duplicates are kept as separate arms") {
    const auto sc = bob_schedule(1, 9, 0.1);  // H = 3, Delta = 2, J = {1, 1, 3}
    CHECK(sc.windows == std::vector<std::int64_t>{1, 1, 3});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(bob_schedule(2, 3, 0.1), DomainError);
    CHECK_THROWS_AS(bob_schedule(0, 100, 0.1), DomainError);
    CHECK(bob_schedule(1, 4, 0.1).block_length == 2);  // smallest valid instance
    CHECK_NOTHROW(bob_schedule(1, 4, 0.1, 2));
    CHECK_THROWS_AS(bob_schedule(1, 100, 0.1, 1), DomainError);
  }
}

TEST_CASE("block reward rescaling") {
  const double q = bob_schedule(2, 30000, 0.1).q_cap;
  CHECK(rescale_block_reward(0.0, q) == 0.5);
  CHECK(rescale_block_reward(-q / 2, q) == 0.0);
  CHECK(rescale_block_reward(100.0, q) == doctest::Approx(0.67663608677767605).epsilon(1e-14));
  CHECK(rescale_block_reward(10 * q, q) == 1.0);
  CHECK(rescale_block_reward(-10 * q, q) == 0.0);
  CHECK(block_reward_threshold(274, 30000, 0.1) == doctest::Approx(283.06786519185496).epsilon(1e-14));
  CHECK(block_reward_threshold(158, 10000, 0.1) == doctest::Approx(164.49704169961408).epsilon(1e-14));
  CHECK(block_reward_threshold(274, 30000, 0.0) == 274.0);
}

TEST_CASE("weight update for a zero block reward") {
  // A constant zero-mean environment gives block sums of exactly zero when R = 0.
  Eigen::MatrixXd th = Eigen::MatrixXd::Zero(2, 40);
  DriftingEnvironment env(th, {Eigen::MatrixXd::Identity(2, 2)}, 40, NoiseModel{0.0}, 0.0, 0.0);
  BobOptions opts;
  opts.ucb.noise_proxy = 0.0;
  opts.block_length = 10;
  BobPolicy bob(opts);
  run_episode(env, bob, EpisodeSeeds{0, 9});
  const auto& sc = bob.schedule();
  const double k = static_cast<double>(sc.delta + 1);
  std::vector<double> expected(sc.windows.size(), 0.0);
  for (const auto& blk : bob.blocks()) {
    CHECK(blk.reward_sum == 0.0);
    CHECK(blk.scaled_reward == 0.5);
    expected[blk.arm] += sc.gamma / (k * blk.probability) * 0.5;
  }
  for (std::size_t j = 0; j < expected.size(); ++j)
    CHECK(bob.exp3().log_weights()[j] == doctest::Approx(expected[j]).epsilon(1e-14));
}

TEST_CASE("initial probabilities are uniform") {
  BobPolicy bob(BobOptions{});
  bob.reset(EpisodeContext{30000, 2, 1});
  for (double p : bob.exp3().probabilities()) CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("bob run invariants") {
  const auto env = make_sinusoidal(20000, 3.0, 0.1);
  BobPolicy bob(BobOptions{});
  bob.reset(EpisodeContext{env.horizon(), env.dim(), 77});
  Rng noise(5);
  const auto& sc = bob.schedule();
  for (std::int64_t t = 0; t < env.horizon(); ++t) {
    const auto& set = env.decision_set(t);
    const auto k = bob.choose(set);
    REQUIRE(bob.block_open());
    const std::int64_t block_start = t - bob.rounds_in_block();
    for (auto r : bob.inner_window_rounds()) {
      REQUIRE(r >= block_start);
      REQUIRE(r < t);
    }
    REQUIRE(static_cast<std::int64_t>(bob.inner_window_rounds().size()) <=
            std::min(bob.current_window(), bob.rounds_in_block()));
    bob.observe(k, env.reward(t, set.col(static_cast<Eigen::Index>(k)), noise));
    if (!bob.block_open()) {
      double sum = 0.0;
      for (double p : bob.exp3().probabilities()) {
        REQUIRE(p >= sc.gamma / (sc.delta + 1) - 1e-12);
        sum += p;
      }
      REQUIRE(std::abs(sum - 1.0) <= 1e-12);
      for (double l : bob.exp3().log_weights()) REQUIRE(std::isfinite(l));
    }
  }
  REQUIRE(static_cast<std::int64_t>(bob.blocks().size()) == sc.num_blocks());
  std::int64_t covered = 0;
  for (const auto& blk : bob.blocks()) {
    CHECK(blk.start == covered);
    CHECK(std::find(sc.windows.begin(), sc.windows.end(), blk.window) != sc.windows.end());
    CHECK(blk.window == sc.windows[blk.arm]);
    covered += blk.length;
  }
  CHECK(covered == env.horizon());
  CHECK(bob.blocks().back().length == env.horizon() - (sc.num_blocks() - 1) * sc.block_length);
}

TEST_CASE("bob equals block-isolated sw-ucb episodes") {
  const auto env = make_sinusoidal(60, 1.0, 0.1);
  BobOptions opts;
  opts.block_length = 30;
  const std::uint64_t policy_seed = 31, noise_seed = 32;
  BobPolicy bob(opts);
  const auto trace = run_episode(env, bob, EpisodeSeeds{noise_seed, policy_seed});

  // Reference: sample each block's arm with a separately held EXP3, then play the
  // block with a brand new SW-UCB that sees only that block.
  const auto sc = bob_schedule(2, 60, 0.1, 30);
  Exp3 exp3(sc.windows.size(), sc.gamma);
  Rng arm_rng(policy_seed), noise(noise_seed);
  std::vector<std::uint32_t> actions;
  for (std::int64_t block = 0; block < 2; ++block) {
    const auto p = exp3.probabilities();
    const auto arm = sample_index(p, arm_rng);
    SwUcbOptions inner;
    inner.rule = WindowRule::kFixed;
    inner.window = sc.windows[arm];
    SwUcbPolicy fresh(inner);
    fresh.reset(EpisodeContext{60, 2, 0});
    double sum = 0.0;
    for (std::int64_t t = block * 30; t < block * 30 + 30; ++t) {
      const auto k = fresh.choose(env.decision_set(t));
      const double y = env.reward(t, env.decision_set(t).col(static_cast<Eigen::Index>(k)), noise);
      fresh.observe(k, y);
      actions.push_back(static_cast<std::uint32_t>(k));
      sum += y;
    }
    exp3.update(arm, rescale_block_reward(sum, sc.q_cap), p[arm]);
    CHECK(bob.blocks()[static_cast<std::size_t>(block)].arm == arm);
    CHECK(bob.blocks()[static_cast<std::size_t>(block)].reward_sum == sum);
  }
  CHECK(trace.action == actions);
  for (std::size_t j = 0; j < sc.windows.size(); ++j) CHECK(exp3.log_weights()[j] == bob.exp3().log_weights()[j]);
}

TEST_CASE("inner radius uses delta = 1/T") {
  BobOptions opts;
  opts.block_length = 20;
  BobPolicy bob(opts);
  bob.reset(EpisodeContext{1000, 2, 4});
  bob.start_block();
  const double w = static_cast<double>(bob.current_window());
  CHECK(bob.inner().beta() == doctest::Approx(0.1 * std::sqrt(2.0 * std::log(1000.0 * (1.0 + w))) + 1.0).epsilon(1e-14));
}

TEST_CASE("block control errors") {
  BobPolicy bob(BobOptions{});
  CHECK_THROWS_AS(bob.start_block(), ContractError);
  bob.reset(EpisodeContext{100, 2, 0});
  CHECK_THROWS_AS(bob.end_block(), ContractError);
  bob.start_block();
  CHECK_THROWS_AS(bob.start_block(), ContractError);
  CHECK_THROWS_AS(bob.end_block(), ContractError);  // no completed round yet
  CHECK_THROWS_AS(bob.observe(0, 1.0), ContractError);
}

TEST_CASE("bob determinism") {
  const auto env = make_sinusoidal(5000, 2.0, 0.1);
  BobPolicy a(BobOptions{}), b(BobOptions{});
  const auto ta = run_episode(env, a, EpisodeSeeds{1, 2});
  const auto tb = run_episode(env, b, EpisodeSeeds{1, 2});
  CHECK(ta.action == tb.action);
  CHECK(ta.cumulative_regret == tb.cumulative_regret);
}
