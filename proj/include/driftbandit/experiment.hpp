#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "driftbandit/checks.hpp"
#include "driftbandit/environment.hpp"
#include "driftbandit/harness.hpp"
#include "driftbandit/policy.hpp"

namespace driftbandit {

enum class PolicyKind { kSwUcb, kUcb, kBob, kExp3S, kUniform };

std::string to_string(PolicyKind kind);
std::string to_string(WindowRule rule);

// One entry of the `policies` list. Unset noise_proxy means the environment's
// noise sd; unset budget means the environment's nominal B_T.
struct PolicySpec {
  std::string name;
  PolicyKind kind = PolicyKind::kSwUcb;
  WindowRule rule = WindowRule::kUnknownBudget;
  std::optional<double> budget;
  std::optional<std::int64_t> window;
  std::optional<std::int64_t> block_length;
  std::optional<double> noise_proxy;
  double action_bound = 1.0;
  double param_bound = 1.0;
  std::optional<double> lambda;
  std::optional<double> delta;

  void validate() const;
};

NamedPolicy make_policy(const PolicySpec& spec);

struct CheckSettings {
  bool bias = true;
  bool deviation = true;
  bool monotonicity = true;
  bool blockreward = true;
  std::size_t instances = 1000;
  DeviationOptions deviation_options;
  std::size_t blockreward_runs = 200;
  std::int64_t blockreward_horizon = 10000;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  std::size_t seeds = 20;
  std::vector<std::int64_t> horizons;
  std::filesystem::path output_dir = "results";
  unsigned workers = 0;  // 0: hardware concurrency
  EnvironmentSpec environment;
  std::vector<PolicySpec> policies;
  CheckSettings checks;

  // Throws ConfigError / DomainError before anything runs.
  void validate() const;
};

// Parsing rejects unknown keys; errors name the offending line.
ExperimentConfig parse_experiment(const std::string& yaml_text);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Built-in copies of presets/fig1.yaml and presets/fig2.yaml.
std::vector<std::string> preset_names();
const std::string& preset_text(const std::string& name);

unsigned resolve_workers(unsigned requested);

struct CheckResults {
  std::optional<BiasReport> bias;
  std::optional<DeviationReport> deviation;
  std::optional<MonotonicityReport> monotonicity;
  std::optional<BlockRewardReport> blockreward;

  bool passed() const;
};

// Runs the enabled suites with streams derived from the master seed. The
// block-reward suite uses the experiment's environment.
CheckResults run_checks(const ExperimentConfig& cfg);

}  // namespace driftbandit
