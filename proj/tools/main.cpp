#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftbandit/errors.hpp"
#include "driftbandit/experiment.hpp"
#include "driftbandit/format.hpp"
#include "driftbandit/harness.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace driftbandit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> master_seed;
  std::optional<unsigned> workers;
  std::vector<std::int64_t> horizons;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  auto* config = cmd->add_option("--config", f.config, "experiment config (YAML)")->envname("DRIFTBANDIT_CONFIG");
  cmd->add_option("--preset", f.preset, "built-in config: fig1 or fig2")
      ->envname("DRIFTBANDIT_PRESET")
      ->check(CLI::IsMember({"fig1", "fig2"}))
      ->excludes(config);
  cmd->add_option("--out", f.out, "output directory")->envname("DRIFTBANDIT_OUT");
  cmd->add_option("--seeds", f.seeds, "seeds per (policy, T)")->envname("DRIFTBANDIT_SEEDS")->check(CLI::PositiveNumber);
  cmd->add_option("--master-seed", f.master_seed, "master seed")->envname("DRIFTBANDIT_MASTER_SEED");
  cmd->add_option("--workers", f.workers, "worker threads (default: all cores)")->envname("DRIFTBANDIT_WORKERS");
  cmd->add_option("--horizons", f.horizons, "override the T grid")->delimiter(',');
}

ExperimentConfig resolve_config(const CommonFlags& f, const std::string& fallback_preset) {
  ExperimentConfig cfg;
  if (!f.config.empty())
    cfg = load_experiment(f.config);
  else
    cfg = parse_experiment(preset_text(f.preset.empty() ? fallback_preset : f.preset));
  if (f.seeds) cfg.seeds = *f.seeds;
  if (f.master_seed) cfg.master_seed = *f.master_seed;
  if (f.workers) cfg.workers = *f.workers;
  if (!f.horizons.empty()) cfg.horizons = f.horizons;
  if (!f.out.empty()) cfg.output_dir = f.out;
  cfg.validate();
  return cfg;
}

std::vector<NamedPolicy> build_policies(const ExperimentConfig& cfg) {
  std::vector<NamedPolicy> out;
  for (const auto& spec : cfg.policies) out.push_back(make_policy(spec));
  return out;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

json environment_json(const EnvironmentSpec& env) {
  return json{{"kind", to_string(env.kind)},     {"dim", env.dim},
              {"budget", env.budget},            {"budget_exponent", env.budget_exponent},
              {"noise_sd", env.noise_sd},        {"seed", env.seed}};
}

// One episode per (T, policy, seed), same seed streams as the sweep.
int cmd_run(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const auto policies = build_policies(cfg);
  const SeedPlan plan{cfg.master_seed};
  SweepResult finals;
  finals.master_seed = cfg.master_seed;
  for (auto horizon : cfg.horizons) {
    for (std::size_t p = 0; p < policies.size(); ++p) {
      SweepRow row;
      row.policy = policies[p].name;
      row.horizon = horizon;
      row.finals.assign(cfg.seeds, 0.0);
      parallel_for(cfg.seeds, resolve_workers(cfg.workers), [&](std::size_t s) {
        Rng env_rng(derive_seed(plan.environment(horizon, s), {cfg.environment.seed}));
        const auto env = cfg.environment.build(horizon, env_rng);
        auto policy = policies[p].make(env);
        const auto trace = run_episode(env, *policy, EpisodeSeeds{plan.noise(horizon, s), plan.policy(horizon, s)});
        auto out = open_output(cfg.output_dir / ("trace_" + policies[p].name + "_T" + std::to_string(horizon) + "_seed" +
                                                 std::to_string(s) + ".csv"));
        write_trace_csv(trace, out);
        row.finals[s] = trace.final_regret();
      });
      std::tie(row.mean, row.std_error) = mean_and_std_error(row.finals);
      std::cout << row.policy << " T=" << horizon << " mean_regret=" << format_double(row.mean) << '\n';
      finals.rows.push_back(std::move(row));
    }
  }
  auto out = open_output(cfg.output_dir / "final_regret.csv");
  write_final_regret_csv(finals, out);
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  SweepOptions opts;
  opts.horizons = cfg.horizons;
  opts.seeds = cfg.seeds;
  opts.master_seed = cfg.master_seed;
  opts.workers = resolve_workers(cfg.workers);
  const auto result = run_sweep(cfg.environment, build_policies(cfg), opts);

  {
    auto out = open_output(cfg.output_dir / "final_regret.csv");
    write_final_regret_csv(result, out);
  }

  json summary{{"master_seed", cfg.master_seed},
               {"seeds", cfg.seeds},
               {"horizons", cfg.horizons},
               {"environment", environment_json(cfg.environment)},
               {"policies", json::array()}};
  for (const auto& spec : cfg.policies) {
    const auto rows = result.rows_for(spec.name);
    json p{{"name", spec.name}, {"kind", to_string(spec.kind)}, {"rows", json::array()}};
    for (const auto* r : rows) {
      p["rows"].push_back({{"T", r->horizon}, {"mean", r->mean}, {"std_error", r->std_error}});
      std::cout << spec.name << " T=" << r->horizon << " mean=" << format_double(r->mean)
                << " se=" << format_double(r->std_error) << '\n';
    }
    if (rows.size() >= 2) {
      const auto fit = loglog_slope(rows);
      p["slope_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual_rms", fit.residual_rms},
                        {"points", fit.points}};
      std::cout << spec.name << " slope=" << format_double(fit.slope) << '\n';
    } else {
      p["slope_fit"] = nullptr;
    }
    summary["policies"].push_back(std::move(p));
  }
  auto out = open_output(cfg.output_dir / "summary.json");
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_check(ExperimentConfig cfg, const std::string& suite) {
  auto& c = cfg.checks;
  if (suite != "all") {
    c.bias = suite == "bias";
    c.deviation = suite == "deviation";
    c.monotonicity = suite == "monotonicity";
    c.blockreward = suite == "blockreward";
  }
  const auto r = run_checks(cfg);
  auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  if (r.bias)
    std::cout << verdict(r.bias->passed()) << " bias instances=" << r.bias->instances
              << " violations=" << r.bias->violations << " max_excess=" << format_double(r.bias->max_excess)
              << " max_path_gap=" << format_double(r.bias->max_path_gap) << '\n';
  if (r.deviation)
    std::cout << verdict(r.deviation->passed()) << " deviation trials=" << r.deviation->trials
              << " violations=" << r.deviation->violations << " rate=" << format_double(r.deviation->rate())
              << " delta=" << format_double(r.deviation->delta) << '\n';
  if (r.monotonicity)
    std::cout << verdict(r.monotonicity->passed()) << " monotonicity instances=" << r.monotonicity->instances
              << " terms=" << r.monotonicity->terms << " violations=" << r.monotonicity->violations
              << " max_excess=" << format_double(r.monotonicity->max_excess)
              << " max_path_gap=" << format_double(r.monotonicity->max_path_gap) << '\n';
  if (r.blockreward)
    std::cout << verdict(r.blockreward->passed()) << " blockreward runs=" << r.blockreward->runs
              << " blocks=" << r.blockreward->blocks << " exceedances=" << r.blockreward->exceedances
              << " threshold=" << format_double(r.blockreward->threshold)
              << " max_abs_block_reward=" << format_double(r.blockreward->max_abs_block_reward) << '\n';
  return r.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drifting linear bandit experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, check_flags;
  auto* run = app.add_subcommand("run", "one episode per (policy, seed); writes per-round traces");
  add_common_flags(run, run_flags);
  auto* sweep = app.add_subcommand("sweep", "T grid x policies x seeds; writes final_regret.csv and summary.json");
  add_common_flags(sweep, sweep_flags);
  auto* check = app.add_subcommand("check", "property suites");
  add_common_flags(check, check_flags);
  std::string suite;
  check->add_option("suite", suite, "bias | deviation | monotonicity | blockreward | all")
      ->required()
      ->check(CLI::IsMember({"bias", "deviation", "monotonicity", "blockreward", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CommonFlags& flags = *run ? run_flags : *sweep ? sweep_flags : check_flags;
  ExperimentConfig cfg;
  try {
    cfg = resolve_config(flags, *check ? "fig2" : "fig1");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(cfg);
    if (*sweep) return cmd_sweep(cfg);
    return cmd_check(cfg, suite);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
