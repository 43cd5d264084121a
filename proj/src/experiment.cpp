#include "driftbandit/experiment.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "driftbandit/bob.hpp"
#include "driftbandit/errors.hpp"
#include "driftbandit/exp3.hpp"
#include "yaml_util.hpp"

namespace driftbandit {

namespace detail {
extern const std::string kPresetFig1;
extern const std::string kPresetFig2;
}  // namespace detail

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kSwUcb: return "sw_ucb";
    case PolicyKind::kUcb: return "ucb";
    case PolicyKind::kBob: return "bob";
    case PolicyKind::kExp3S: return "exp3s";
    case PolicyKind::kUniform: return "uniform";
  }
  throw InternalError("unknown policy kind");
}

std::string to_string(WindowRule rule) {
  switch (rule) {
    case WindowRule::kFixed: return "fixed";
    case WindowRule::kKnownBudget: return "known_budget";
    case WindowRule::kUnknownBudget: return "unknown_budget";
    case WindowRule::kFullHorizon: return "full_horizon";
  }
  throw InternalError("unknown window rule");
}

namespace {

PolicyKind policy_kind_from_string(const std::string& s) {
  for (auto k : {PolicyKind::kSwUcb, PolicyKind::kUcb, PolicyKind::kBob, PolicyKind::kExp3S, PolicyKind::kUniform})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown policy kind '" + s + "' (sw_ucb, ucb, bob, exp3s, uniform)");
}

WindowRule window_rule_from_string(const std::string& s) {
  for (auto r : {WindowRule::kFixed, WindowRule::kKnownBudget, WindowRule::kUnknownBudget, WindowRule::kFullHorizon})
    if (to_string(r) == s) return r;
  throw ConfigError("unknown window rule '" + s + "' (fixed, known_budget, unknown_budget, full_horizon)");
}

UcbSettings ucb_settings(const PolicySpec& spec, const DriftingEnvironment& env) {
  UcbSettings ucb;
  ucb.noise_proxy = spec.noise_proxy.value_or(env.noise().sd);
  ucb.action_bound = spec.action_bound;
  ucb.param_bound = spec.param_bound;
  ucb.lambda = spec.lambda;
  ucb.delta = spec.delta;
  return ucb;
}

}  // namespace

void PolicySpec::validate() const {
  if (name.empty()) throw ConfigError("policy: empty name");
  if (kind == PolicyKind::kSwUcb && rule == WindowRule::kFixed && !window)
    throw ConfigError("policy '" + name + "': fixed window rule needs window_length");
  if (window && *window < 1) throw DomainError("policy '" + name + "': window_length must be >= 1");
  if (block_length && *block_length < 2) throw DomainError("policy '" + name + "': block_length must be >= 2");
  if (budget && !(*budget >= 0.0)) throw DomainError("policy '" + name + "': budget must be >= 0");
  if (noise_proxy && !(*noise_proxy >= 0.0)) throw DomainError("policy '" + name + "': R must be >= 0");
  if (!(action_bound > 0.0) || !(param_bound > 0.0)) throw DomainError("policy '" + name + "': L and S must be > 0");
  if (lambda && !(*lambda > 0.0)) throw DomainError("policy '" + name + "': lambda must be > 0");
  if (lambda && *lambda * param_bound * param_bound < 1.0 - 1e-12)
    throw DomainError("policy '" + name + "': lambda must be >= 1/S^2");
  if (delta && !(*delta > 0.0 && *delta <= 1.0)) throw DomainError("policy '" + name + "': delta must be in (0, 1]");
}

NamedPolicy make_policy(const PolicySpec& spec) {
  spec.validate();
  PolicyFactory make;
  switch (spec.kind) {
    case PolicyKind::kSwUcb:
      make = [spec](const DriftingEnvironment& env) -> std::unique_ptr<Policy> {
        SwUcbOptions opts;
        opts.rule = spec.rule;
        opts.window = spec.window.value_or(0);
        opts.budget = spec.budget.value_or(env.nominal_budget());
        opts.ucb = ucb_settings(spec, env);
        return std::make_unique<SwUcbPolicy>(opts, spec.name);
      };
      break;
    case PolicyKind::kUcb:
      make = [spec](const DriftingEnvironment& env) -> std::unique_ptr<Policy> {
        SwUcbOptions opts;
        opts.rule = WindowRule::kFullHorizon;
        opts.ucb = ucb_settings(spec, env);
        return std::make_unique<SwUcbPolicy>(opts, spec.name);
      };
      break;
    case PolicyKind::kBob:
      make = [spec](const DriftingEnvironment& env) -> std::unique_ptr<Policy> {
        BobOptions opts;
        opts.ucb = ucb_settings(spec, env);
        opts.block_length = spec.block_length;
        return std::make_unique<BobPolicy>(opts);
      };
      break;
    case PolicyKind::kExp3S:
      make = [spec](const DriftingEnvironment& env) -> std::unique_ptr<Policy> {
        return std::make_unique<Exp3SPolicy>(spec.budget.value_or(env.nominal_budget()));
      };
      break;
    case PolicyKind::kUniform:
      make = [](const DriftingEnvironment&) -> std::unique_ptr<Policy> {
        return std::make_unique<UniformRandomPolicy>();
      };
      break;
  }
  return NamedPolicy{spec.name, std::move(make)};
}

void ExperimentConfig::validate() const {
  if (seeds == 0) throw ConfigError("experiment: seeds must be >= 1");
  if (horizons.empty()) throw ConfigError("experiment: horizons must not be empty");
  for (auto t : horizons)
    if (t < 1) throw DomainError("experiment: horizons must be >= 1");
  environment.validate();
  if (policies.empty()) throw ConfigError("experiment: no policies");
  for (std::size_t i = 0; i < policies.size(); ++i) {
    policies[i].validate();
    for (std::size_t j = 0; j < i; ++j)
      if (policies[i].name == policies[j].name) throw ConfigError("experiment: duplicate policy name '" + policies[i].name + "'");
    if (policies[i].kind == PolicyKind::kExp3S && environment.kind == ThetaProcess::kBudgetedRandomWalk)
      throw ConfigError("policy '" + policies[i].name + "': exp3s needs a standard basis decision set");
    if (policies[i].kind == PolicyKind::kExp3S && environment.kind == ThetaProcess::kLowerBoundBlocks)
      throw ConfigError("policy '" + policies[i].name + "': exp3s needs a standard basis decision set");
  }
  if (checks.instances == 0) throw ConfigError("checks: instances must be >= 1");
  if (checks.deviation_options.trials == 0) throw ConfigError("checks: trials must be >= 1");
  if (checks.blockreward_runs == 0) throw ConfigError("checks: blockreward_runs must be >= 1");
  if (checks.blockreward_horizon < 4) throw DomainError("checks: blockreward_horizon must be >= 4");
}

namespace {

PolicySpec policy_from_yaml(const YAML::Node& node) {
  yaml::require_map(node, "policy");
  yaml::check_keys(node, "policy",
                   {"name", "kind", "window", "window_length", "budget", "block_length", "R", "L", "S", "lambda",
                    "delta"});
  PolicySpec spec;
  spec.name = yaml::read_required<std::string>(node, "name");
  const auto kind = node["kind"];
  if (!kind) yaml::fail(node, "missing required key 'kind' in policy");
  try {
    spec.kind = policy_kind_from_string(yaml::as<std::string>(kind, "kind"));
  } catch (const ConfigError& e) {
    yaml::fail(kind, e.what());
  }
  if (const auto w = node["window"]) {
    if (spec.kind != PolicyKind::kSwUcb) yaml::fail(w, "'window' applies to sw_ucb only");
    try {
      spec.rule = window_rule_from_string(yaml::as<std::string>(w, "window"));
    } catch (const ConfigError& e) {
      yaml::fail(w, e.what());
    }
  }
  if (const auto n = node["window_length"]) {
    spec.window = yaml::as<std::int64_t>(n, "window_length");
    if (!node["window"]) spec.rule = WindowRule::kFixed;
  }
  if (const auto n = node["budget"]) spec.budget = yaml::as<double>(n, "budget");
  if (const auto n = node["block_length"]) {
    if (spec.kind != PolicyKind::kBob) yaml::fail(n, "'block_length' applies to bob only");
    spec.block_length = yaml::as<std::int64_t>(n, "block_length");
  }
  if (const auto n = node["R"]) spec.noise_proxy = yaml::as<double>(n, "R");
  yaml::read_optional(node, "L", spec.action_bound);
  yaml::read_optional(node, "S", spec.param_bound);
  if (const auto n = node["lambda"]) spec.lambda = yaml::as<double>(n, "lambda");
  if (const auto n = node["delta"]) spec.delta = yaml::as<double>(n, "delta");
  try {
    spec.validate();
  } catch (const std::exception& e) {
    yaml::fail(node, e.what());
  }
  return spec;
}

CheckSettings checks_from_yaml(const YAML::Node& node) {
  yaml::require_map(node, "checks");
  yaml::check_keys(node, "checks",
                   {"bias", "deviation", "monotonicity", "blockreward", "instances", "trials", "delta",
                    "blockreward_runs", "blockreward_horizon"});
  CheckSettings c;
  yaml::read_optional(node, "bias", c.bias);
  yaml::read_optional(node, "deviation", c.deviation);
  yaml::read_optional(node, "monotonicity", c.monotonicity);
  yaml::read_optional(node, "blockreward", c.blockreward);
  yaml::read_optional(node, "instances", c.instances);
  yaml::read_optional(node, "trials", c.deviation_options.trials);
  yaml::read_optional(node, "delta", c.deviation_options.delta);
  yaml::read_optional(node, "blockreward_runs", c.blockreward_runs);
  yaml::read_optional(node, "blockreward_horizon", c.blockreward_horizon);
  return c;
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  yaml::check_keys(root, "config", {"experiment", "environment", "policies", "checks"});

  ExperimentConfig cfg;
  const auto exp = root["experiment"];
  if (!exp) yaml::fail(root, "missing required section 'experiment'");
  yaml::require_map(exp, "experiment");
  yaml::check_keys(exp, "experiment", {"master_seed", "seeds", "horizons", "output_dir", "workers"});
  yaml::read_optional(exp, "master_seed", cfg.master_seed);
  yaml::read_optional(exp, "seeds", cfg.seeds);
  cfg.horizons = yaml::read_required<std::vector<std::int64_t>>(exp, "horizons");
  if (const auto n = exp["output_dir"]) cfg.output_dir = yaml::as<std::string>(n, "output_dir");
  yaml::read_optional(exp, "workers", cfg.workers);

  const auto env = root["environment"];
  if (!env) yaml::fail(root, "missing required section 'environment'");
  cfg.environment = environment_spec_from_yaml(env);

  const auto pols = root["policies"];
  if (!pols) yaml::fail(root, "missing required section 'policies'");
  if (!pols.IsSequence()) yaml::fail(pols, "policies must be a list");
  for (const auto& p : pols) cfg.policies.push_back(policy_from_yaml(p));

  if (const auto c = root["checks"]) cfg.checks = checks_from_yaml(c);

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_experiment(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> preset_names() { return {"fig1", "fig2"}; }

const std::string& preset_text(const std::string& name) {
  if (name == "fig1") return detail::kPresetFig1;
  if (name == "fig2") return detail::kPresetFig2;
  throw ConfigError("unknown preset '" + name + "' (fig1, fig2)");
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

bool CheckResults::passed() const {
  return (!bias || bias->passed()) && (!deviation || deviation->passed()) &&
         (!monotonicity || monotonicity->passed()) && (!blockreward || blockreward->passed());
}

CheckResults run_checks(const ExperimentConfig& cfg) {
  CheckResults out;
  const auto& c = cfg.checks;
  if (c.bias) {
    Rng rng(derive_seed(cfg.master_seed, {10}));
    out.bias = check_bias_bound(c.instances, rng);
  }
  if (c.deviation) {
    Rng rng(derive_seed(cfg.master_seed, {11}));
    out.deviation = check_deviation_bound(c.deviation_options, rng);
  }
  if (c.monotonicity) {
    Rng rng(derive_seed(cfg.master_seed, {12}));
    out.monotonicity = check_norm_monotonicity(c.instances, rng);
  }
  if (c.blockreward)
    out.blockreward = check_block_reward_bound(cfg.environment, c.blockreward_horizon, c.blockreward_runs,
                                               derive_seed(cfg.master_seed, {13}));
  return out;
}

}  // namespace driftbandit
