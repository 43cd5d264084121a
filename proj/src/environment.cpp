#include "driftbandit/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <yaml-cpp/yaml.h>

#include "driftbandit/errors.hpp"
#include "driftbandit/format.hpp"
#include "numeric.hpp"
#include "yaml_util.hpp"

namespace driftbandit {

double NoiseModel::sample(Rng& rng) const {
  if (sd == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, sd);
  return normal(rng);
}

DriftingEnvironment::DriftingEnvironment(Eigen::MatrixXd thetas, std::vector<DecisionSet> decision_sets,
                                         std::int64_t set_stride, NoiseModel noise, double declared_budget,
                                         double nominal_budget)
    : thetas_(std::move(thetas)),
      decision_sets_(std::move(decision_sets)),
      set_stride_(set_stride),
      noise_(noise),
      declared_budget_(declared_budget),
      nominal_budget_(nominal_budget) {
  if (thetas_.rows() < 1 || thetas_.cols() < 1) throw ConfigError("environment: empty theta sequence");
  if (decision_sets_.empty()) throw ConfigError("environment: no decision sets");
  if (set_stride_ < 1) throw ConfigError("environment: set stride must be >= 1");
  for (const auto& set : decision_sets_) {
    if (set.rows() != thetas_.rows()) throw ConfigError("environment: decision set dimension mismatch");
  }
  if (!(noise_.sd >= 0.0)) throw DomainError("environment: noise sd must be >= 0");
  if (!(declared_budget_ >= 0.0)) throw DomainError("environment: declared budget must be >= 0");
}

void DriftingEnvironment::check_round(std::int64_t t) const {
  if (t < 0 || t >= horizon())
    throw DomainError("environment: round " + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + ")");
}

Eigen::Ref<const Eigen::VectorXd> DriftingEnvironment::theta(std::int64_t t) const {
  check_round(t);
  return thetas_.col(t);
}

const DecisionSet& DriftingEnvironment::decision_set(std::int64_t t) const {
  check_round(t);
  const auto idx = std::min<std::int64_t>(t / set_stride_, static_cast<std::int64_t>(decision_sets_.size()) - 1);
  return decision_sets_[static_cast<std::size_t>(idx)];
}

double DriftingEnvironment::mean_reward(std::int64_t t, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_round(t);
  if (x.size() != thetas_.rows()) throw ConfigError("environment: action dimension mismatch");
  return x.dot(thetas_.col(t));
}

double DriftingEnvironment::reward(std::int64_t t, const Eigen::Ref<const Eigen::VectorXd>& x, Rng& rng) const {
  return mean_reward(t, x) + noise_.sample(rng);
}

std::size_t argmax_reward(const DecisionSet& actions, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (actions.cols() == 0) throw DomainError("argmax_reward: empty decision set");
  std::size_t best = 0;
  double best_value = actions.col(0).dot(theta);
  for (Eigen::Index k = 1; k < actions.cols(); ++k) {
    const double v = actions.col(k).dot(theta);
    if (v > best_value) {
      best_value = v;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

std::size_t DriftingEnvironment::best_action_index(std::int64_t t) const {
  return argmax_reward(decision_set(t), thetas_.col(t));
}

Eigen::VectorXd DriftingEnvironment::best_action(std::int64_t t) const {
  return decision_set(t).col(static_cast<Eigen::Index>(best_action_index(t)));
}

double DriftingEnvironment::max_param_norm() const { return thetas_.colwise().norm().maxCoeff(); }

double DriftingEnvironment::max_action_norm() const {
  double m = 0.0;
  for (const auto& set : decision_sets_)
    if (set.cols() > 0) m = std::max(m, set.colwise().norm().maxCoeff());
  return m;
}

double DriftingEnvironment::max_abs_mean_reward() const {
  double m = 0.0;
  for (std::int64_t t = 0; t < horizon(); ++t) {
    const auto& set = decision_set(t);
    if (set.cols() > 0) m = std::max(m, (set.transpose() * thetas_.col(t)).cwiseAbs().maxCoeff());
  }
  return m;
}

double variation(const DriftingEnvironment& env) {
  const auto& th = env.thetas();
  double total = 0.0;
  for (Eigen::Index t = 0; t + 1 < th.cols(); ++t) total += (th.col(t + 1) - th.col(t)).norm();
  return total;
}

// ---------------------------------------------------------------------------

double sinusoidal_budget_bound(double budget) {
  // sin has total variation <= 2 on any interval of length pi and the phase
  // sweeps less than 5 B pi; each coordinate has amplitude 0.3.
  return 0.6 * std::numbers::sqrt2 * std::ceil(5.0 * budget);
}

DriftingEnvironment make_sinusoidal(std::int64_t horizon, double budget, double noise_sd) {
  if (horizon < 1) throw DomainError("make_sinusoidal: T must be >= 1");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw DomainError("make_sinusoidal: B_T must be positive");
  Eigen::MatrixXd thetas(2, horizon);
  const double rate = 5.0 * budget * std::numbers::pi / static_cast<double>(horizon);
  for (std::int64_t t = 0; t < horizon; ++t) {
    const double phase = rate * static_cast<double>(t + 1);
    thetas(0, t) = 0.5 + 0.3 * std::sin(phase);
    thetas(1, t) = 0.5 + 0.3 * std::sin(std::numbers::pi + phase);
  }
  std::vector<DecisionSet> sets{Eigen::MatrixXd::Identity(2, 2)};
  return DriftingEnvironment(std::move(thetas), std::move(sets), horizon, NoiseModel{noise_sd},
                             sinusoidal_budget_bound(budget), budget);
}

std::int64_t lower_bound_block_length(int dim, std::int64_t horizon, double budget) {
  if (dim < 1) throw DomainError("lower bound instance: d must be >= 1");
  if (horizon < dim) throw DomainError("lower bound instance: requires T >= d");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw DomainError("lower bound instance: B_T must be positive");
  const double dt = static_cast<double>(dim) * static_cast<double>(horizon);
  const double h = detail::ceil_pow(dt / budget, 2.0 / 3.0);
  const double h_norm = std::ceil(static_cast<double>(dim) * dim / 4.0);
  return static_cast<std::int64_t>(std::max({h, h_norm, 1.0}));
}

DriftingEnvironment make_lower_bound_instance(int dim, std::int64_t horizon, double budget, double noise_sd,
                                              Rng& rng) {
  const std::int64_t block = lower_bound_block_length(dim, horizon, budget);
  // block > horizon leaves a single stationary block; that is a valid instance.
  const std::int64_t n_blocks = (horizon + block - 1) / block;
  const double magnitude = std::sqrt(static_cast<double>(dim) / (4.0 * static_cast<double>(block)));

  Eigen::MatrixXd thetas(dim, horizon);
  std::vector<DecisionSet> sets;
  sets.reserve(static_cast<std::size_t>(n_blocks));
  std::bernoulli_distribution coin(0.5);
  for (std::int64_t i = 0; i < n_blocks; ++i) {
    Eigen::VectorXd theta(dim);
    for (int k = 0; k < dim; ++k) theta(k) = coin(rng) ? magnitude : -magnitude;
    const std::int64_t begin = i * block;
    const std::int64_t end = std::min(horizon, begin + block);
    for (std::int64_t t = begin; t < end; ++t) thetas.col(t) = theta;

    DecisionSet set(dim, 2 * dim + 1);
    set.leftCols(dim) = Eigen::MatrixXd::Identity(dim, dim);
    set.middleCols(dim, dim) = -Eigen::MatrixXd::Identity(dim, dim);
    set.col(2 * dim) = theta / theta.norm();
    sets.push_back(std::move(set));
  }
  return DriftingEnvironment(std::move(thetas), std::move(sets), block, NoiseModel{noise_sd}, budget, budget);
}

namespace {

Eigen::VectorXd random_unit(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int k = 0; k < dim; ++k) v(k) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

DriftingEnvironment make_budgeted_random_walk(int dim, std::int64_t horizon, double budget, double noise_sd,
                                              int num_actions, double param_bound, Rng& rng) {
  if (dim < 1 || horizon < 1 || num_actions < 1) throw DomainError("random walk: d, T and K must be >= 1");
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw DomainError("random walk: B_T must be >= 0");
  if (!(param_bound > 0.0 && param_bound <= 1.0)) throw DomainError("random walk: S must lie in (0, 1]");
  // 1e-9 of rounding headroom keeps the summed variation at or below B_T
  const double step = horizon > 1 ? budget / static_cast<double>(horizon - 1) * (1.0 - 1e-9) : 0.0;
  if (step > param_bound)
    throw DomainError("random walk: step B_T/(T-1) exceeds S; the walk cannot stay inside the ball");

  DecisionSet actions(dim, num_actions);
  for (int k = 0; k < num_actions; ++k) actions.col(k) = random_unit(dim, rng);

  Eigen::MatrixXd thetas(dim, horizon);
  // Uniform in the S-ball: uniform direction, radius S U^{1/d}.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  thetas.col(0) = random_unit(dim, rng) * param_bound * std::pow(unif(rng), 1.0 / dim);

  constexpr int kMaxTries = 16;
  for (std::int64_t t = 1; t < horizon; ++t) {
    const Eigen::VectorXd prev = thetas.col(t - 1);
    Eigen::VectorXd next;
    bool inside = false;
    for (int attempt = 0; attempt < kMaxTries && !inside; ++attempt) {
      next = prev + step * random_unit(dim, rng);
      inside = next.norm() <= param_bound;
    }
    if (!inside) {
      // Step toward the origin: |‖prev‖ - step| <= S because step <= S.
      const double n = prev.norm();
      const Eigen::VectorXd dir = n > 0.0 ? Eigen::VectorXd(-prev / n) : random_unit(dim, rng);
      next = prev + step * dir;
    }
    thetas.col(t) = next;
  }
  // |<x, theta>| <= ||x|| ||theta|| <= S <= 1 for unit actions.
  std::vector<DecisionSet> sets{std::move(actions)};
  return DriftingEnvironment(std::move(thetas), std::move(sets), horizon, NoiseModel{noise_sd}, budget, budget);
}

// ---------------------------------------------------------------------------

std::string to_string(ThetaProcess kind) {
  switch (kind) {
    case ThetaProcess::kConstant: return "constant";
    case ThetaProcess::kSinusoidal: return "sinusoidal";
    case ThetaProcess::kLowerBoundBlocks: return "lower_bound_blocks";
    case ThetaProcess::kBudgetedRandomWalk: return "budgeted_random_walk";
  }
  return "unknown";
}

ThetaProcess theta_process_from_string(const std::string& name) {
  for (auto k : {ThetaProcess::kConstant, ThetaProcess::kSinusoidal, ThetaProcess::kLowerBoundBlocks,
                 ThetaProcess::kBudgetedRandomWalk})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown environment kind '" + name + "'");
}

double EnvironmentSpec::budget_for(std::int64_t horizon) const {
  if (budget_exponent == 0.0) return budget;
  return budget * std::pow(static_cast<double>(horizon), budget_exponent);
}

void EnvironmentSpec::validate() const {
  if (dim < 1) throw ConfigError("environment: dim must be >= 1");
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw ConfigError("environment: budget must be >= 0");
  if (!(budget_exponent >= 0.0 && budget_exponent < 1.0))
    throw ConfigError("environment: budget_exponent must lie in [0, 1)");
  if (!(noise_sd >= 0.0)) throw ConfigError("environment: noise_sd must be >= 0");
  if (kind == ThetaProcess::kSinusoidal && dim != 2) throw ConfigError("environment: sinusoidal requires dim = 2");
  if (kind == ThetaProcess::kSinusoidal && !(budget > 0.0))
    throw ConfigError("environment: sinusoidal requires budget > 0");
  if (kind == ThetaProcess::kLowerBoundBlocks && !(budget > 0.0))
    throw ConfigError("environment: lower_bound_blocks requires budget > 0");
  if (kind == ThetaProcess::kBudgetedRandomWalk && num_actions < 1)
    throw ConfigError("environment: num_actions must be >= 1");
  if (kind == ThetaProcess::kConstant && !theta.empty() && static_cast<int>(theta.size()) != dim)
    throw ConfigError("environment: theta must have dim entries");
}

DriftingEnvironment EnvironmentSpec::build(std::int64_t horizon, Rng& rng) const {
  validate();
  const double b = budget_for(horizon);
  switch (kind) {
    case ThetaProcess::kSinusoidal: return make_sinusoidal(horizon, b, noise_sd);
    case ThetaProcess::kLowerBoundBlocks: return make_lower_bound_instance(dim, horizon, b, noise_sd, rng);
    case ThetaProcess::kBudgetedRandomWalk:
      return make_budgeted_random_walk(dim, horizon, b, noise_sd, num_actions, param_bound, rng);
    case ThetaProcess::kConstant: {
      Eigen::VectorXd th = Eigen::VectorXd::Zero(dim);
      if (theta.empty()) {
        th(0) = 0.6;
        if (dim > 1) th(1) = 0.4;
      } else {
        for (int k = 0; k < dim; ++k) th(k) = theta[static_cast<std::size_t>(k)];
      }
      if (horizon < 1) throw DomainError("constant environment: T must be >= 1");
      Eigen::MatrixXd thetas = th.replicate(1, horizon);
      std::vector<DecisionSet> sets{Eigen::MatrixXd::Identity(dim, dim)};
      return DriftingEnvironment(std::move(thetas), std::move(sets), horizon, NoiseModel{noise_sd}, b, b);
    }
  }
  throw InternalError("unhandled environment kind");
}

EnvironmentSpec environment_spec_from_yaml(const YAML::Node& node) {
  yaml::require_map(node, "environment");
  yaml::check_keys(node, "environment",
                   {"kind", "dim", "budget", "budget_exponent", "noise_sd", "num_actions", "param_bound", "theta",
                    "seed"});
  EnvironmentSpec spec;
  const auto kind_node = node["kind"];
  if (!kind_node) yaml::fail(node, "missing required key 'kind' in environment");
  try {
    spec.kind = theta_process_from_string(yaml::as<std::string>(kind_node, "kind"));
  } catch (const ConfigError& e) {
    yaml::fail(kind_node, e.what());
  }
  yaml::read_optional(node, "dim", spec.dim);
  yaml::read_optional(node, "budget", spec.budget);
  yaml::read_optional(node, "budget_exponent", spec.budget_exponent);
  yaml::read_optional(node, "noise_sd", spec.noise_sd);
  yaml::read_optional(node, "num_actions", spec.num_actions);
  yaml::read_optional(node, "param_bound", spec.param_bound);
  yaml::read_optional(node, "theta", spec.theta);
  yaml::read_optional(node, "seed", spec.seed);
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    yaml::fail(node, e.what());
  }
  return spec;
}

void environment_spec_to_yaml(const EnvironmentSpec& spec, std::ostream& out) {
  YAML::Emitter em;
  em << YAML::BeginMap;
  em << YAML::Key << "kind" << YAML::Value << to_string(spec.kind);
  em << YAML::Key << "dim" << YAML::Value << spec.dim;
  em << YAML::Key << "budget" << YAML::Value << format_double(spec.budget);
  em << YAML::Key << "budget_exponent" << YAML::Value << format_double(spec.budget_exponent);
  em << YAML::Key << "noise_sd" << YAML::Value << format_double(spec.noise_sd);
  em << YAML::Key << "num_actions" << YAML::Value << spec.num_actions;
  em << YAML::Key << "param_bound" << YAML::Value << format_double(spec.param_bound);
  if (!spec.theta.empty()) {
    em << YAML::Key << "theta" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double v : spec.theta) em << format_double(v);
    em << YAML::EndSeq;
  }
  em << YAML::Key << "seed" << YAML::Value << spec.seed;
  em << YAML::EndMap;
  out << em.c_str() << '\n';
}

void write_theta_csv(const DriftingEnvironment& env, std::ostream& out) {
  out << 't';
  for (int k = 0; k < env.dim(); ++k) out << ",theta_" << (k + 1);
  out << '\n';
  for (std::int64_t t = 0; t < env.horizon(); ++t) {
    out << (t + 1);
    for (int k = 0; k < env.dim(); ++k) out << ',' << format_double(env.thetas()(k, t));
    out << '\n';
  }
}

}  // namespace driftbandit
