#include <doctest.h>

#include <fstream>
#include <sstream>

#include "driftbandit/bob.hpp"
#include "driftbandit/errors.hpp"
#include "driftbandit/experiment.hpp"

using namespace driftbandit;

namespace {

const char* kMinimal = R"(experiment:
  master_seed: 4
  seeds: 3
  horizons: [100, 200]
environment:
  kind: sinusoidal
  dim: 2
  budget: 1.0
  noise_sd: 0.1
policies:
  - name: a
    kind: sw_ucb
    window: known_budget
  - name: b
    kind: bob
)";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_experiment(text);
  } catch (const ConfigError& e) {
    return e.what();
  } catch (const DomainError& e) {
    return std::string("domain: ") + e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config") {
  const auto cfg = parse_experiment(kMinimal);
  CHECK(cfg.master_seed == 4);
  CHECK(cfg.seeds == 3);
  CHECK(cfg.horizons == std::vector<std::int64_t>{100, 200});
  CHECK(cfg.output_dir == "results");
  REQUIRE(cfg.policies.size() == 2);
  CHECK(cfg.policies[0].kind == PolicyKind::kSwUcb);
  CHECK(cfg.policies[0].rule == WindowRule::kKnownBudget);
  CHECK(cfg.policies[1].kind == PolicyKind::kBob);
  CHECK(cfg.checks.instances == 1000);
}

TEST_CASE("config errors name the line") {
  std::string t = kMinimal;
  SUBCASE("unknown key") {
    t.replace(t.find("  seeds: 3"), 10, "  seedz: 3");
    const auto e = error_of(t);
    CHECK(e.find("line 3") != std::string::npos);
    CHECK(e.find("seedz") != std::string::npos);
  }
  SUBCASE("unknown policy key") {
    t += "    windoww: 3\n";
    CHECK(error_of(t).find("line 16") != std::string::npos);
  }
  SUBCASE("missing policy kind") {
    t.replace(t.find("    kind: bob\n"), 14, "");
    CHECK(error_of(t).find("line 14") != std::string::npos);
  }
  SUBCASE("unknown window rule") {
    t.replace(t.find("known_budget"), 12, "whatever");
    CHECK(error_of(t).find("line 13") != std::string::npos);
  }
  SUBCASE("window on a non sw-ucb policy") {
    t += "    window: fixed\n";
    CHECK(error_of(t).find("sw_ucb only") != std::string::npos);
  }
  SUBCASE("broken yaml") { CHECK(error_of("experiment: [1, 2\n").find("line") != std::string::npos); }
}

TEST_CASE("config validation") {
  std::string t = kMinimal;
  SUBCASE("missing horizons") {
    t.replace(t.find("  horizons: [100, 200]\n"), 23, "");
    CHECK_THROWS_AS(parse_experiment(t), ConfigError);
  }
  SUBCASE("duplicate names") {
    t.replace(t.find("name: b"), 7, "name: a");
    CHECK(error_of(t).find("duplicate") != std::string::npos);
  }
  SUBCASE("no horizons") {
    t.replace(t.find("[100, 200]"), 10, "[]");
    CHECK_THROWS_AS(parse_experiment(t), ConfigError);
  }
  SUBCASE("exp3s needs a basis") {
    t.replace(t.find("kind: sinusoidal"), 16, "kind: lower_bound_blocks");
    t.replace(t.find("kind: bob"), 9, "kind: exp3s");
    CHECK_THROWS_AS(parse_experiment(t), ConfigError);
  }
}

TEST_CASE("presets") {
  CHECK(preset_names() == std::vector<std::string>{"fig1", "fig2"});
  CHECK(preset_text("fig1") == read_file(DRIFTBANDIT_SOURCE_DIR "/presets/fig1.yaml"));
  CHECK(preset_text("fig2") == read_file(DRIFTBANDIT_SOURCE_DIR "/presets/fig2.yaml"));
  CHECK_THROWS_AS(preset_text("fig3"), ConfigError);

  const auto f1 = parse_experiment(preset_text("fig1"));
  CHECK(f1.seeds == 20);
  CHECK(f1.horizons.size() == 8);
  CHECK(f1.horizons.front() == 30000);
  CHECK(f1.horizons.back() == 240000);
  CHECK(f1.environment.kind == ThetaProcess::kSinusoidal);
  CHECK(f1.policies[1].kind == PolicyKind::kExp3S);

  const auto f2 = parse_experiment(preset_text("fig2"));
  CHECK(f2.environment.budget_exponent == doctest::Approx(1.0 / 3.0));
  CHECK(f2.policies[0].rule == WindowRule::kUnknownBudget);
  CHECK(f2.policies[1].kind == PolicyKind::kBob);
}

TEST_CASE("make_policy fills defaults from the environment") {
  EnvironmentSpec spec;
  spec.noise_sd = 0.25;
  spec.budget = 2.0;
  Rng rng(3);
  const auto env = spec.build(1000, rng);
  PolicySpec p;
  p.name = "x";
  p.rule = WindowRule::kKnownBudget;
  auto named = make_policy(p);
  CHECK(named.name == "x");
  auto pol = named.make(env);
  auto* sw = dynamic_cast<SwUcbPolicy*>(pol.get());
  REQUIRE(sw != nullptr);
  pol->reset(EpisodeContext{1000, 2, 0});
  CHECK(sw->window() == swucb_window_for_known_budget(2, 1000, 2.0));
  SwUcbOptions ref;
  ref.rule = WindowRule::kKnownBudget;
  ref.budget = 2.0;
  ref.ucb.noise_proxy = 0.25;
  SwUcbPolicy manual(ref);
  manual.reset(EpisodeContext{1000, 2, 0});
  CHECK(sw->beta() == manual.beta());

  p.kind = PolicyKind::kUniform;
  CHECK(dynamic_cast<UniformRandomPolicy*>(make_policy(p).make(env).get()) != nullptr);
  p.kind = PolicyKind::kBob;
  CHECK(dynamic_cast<BobPolicy*>(make_policy(p).make(env).get()) != nullptr);
}

TEST_CASE("workers") {
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("run_checks honours toggles") {
  auto cfg = parse_experiment(kMinimal);
  cfg.checks.bias = false;
  cfg.checks.blockreward = false;
  cfg.checks.instances = 20;
  cfg.checks.deviation_options.trials = 200;
  const auto r = run_checks(cfg);
  CHECK_FALSE(r.bias.has_value());
  CHECK_FALSE(r.blockreward.has_value());
  REQUIRE(r.deviation.has_value());
  CHECK(r.deviation->trials == 200);
  REQUIRE(r.monotonicity.has_value());
  CHECK(r.monotonicity->instances == 20);
  CHECK(r.passed());
}
