#include "driftbandit/policy.hpp"

#include <algorithm>
#include <cmath>

#include "driftbandit/errors.hpp"
#include "numeric.hpp"

namespace driftbandit {

void Policy::reset(const EpisodeContext& ctx) {
  if (ctx.horizon < 1) throw ConfigError("policy: horizon must be >= 1");
  if (ctx.dim < 1) throw ConfigError("policy: dimension must be >= 1");
  ctx_ = ctx;
  pending_.reset();
  do_reset(ctx);
  ready_ = true;
}

std::size_t Policy::choose(const DecisionSet& actions) {
  if (!ready_) throw ContractError(name() + ": choose() before reset()");
  if (pending_) throw ContractError(name() + ": choose() called twice without observe()");
  if (actions.cols() == 0) throw DomainError(name() + ": empty decision set");
  if (actions.rows() != ctx_.dim) throw ConfigError(name() + ": decision set dimension mismatch");
  const std::size_t k = do_choose(actions);
  pending_ = k;
  pending_action_ = actions.col(static_cast<Eigen::Index>(k));
  return k;
}

void Policy::observe(std::size_t action, double reward) {
  if (!pending_) throw ContractError(name() + ": observe() without a preceding choose()");
  if (*pending_ != action) throw ContractError(name() + ": observe() for an action that was not chosen");
  pending_.reset();
  do_observe(pending_action_, action, reward);
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t clamp_window(double w, std::int64_t horizon) {
  if (!(w >= 1.0)) return 1;
  if (w >= static_cast<double>(horizon)) return horizon;
  return static_cast<std::int64_t>(w);
}

}  // namespace

std::int64_t swucb_window_for_known_budget(int dim, std::int64_t horizon, double budget) {
  if (dim < 1 || horizon < 1) throw DomainError("window rule: d and T must be >= 1");
  if (!(budget >= 0.0)) throw DomainError("window rule: B_T must be >= 0");
  const double dt = static_cast<double>(dim) * static_cast<double>(horizon);
  return clamp_window(detail::floor_pow(dt / (budget + 1.0), 2.0 / 3.0), horizon);
}

std::int64_t swucb_window_for_unknown_budget(int dim, std::int64_t horizon) {
  if (dim < 1 || horizon < 1) throw DomainError("window rule: d and T must be >= 1");
  const double dt = static_cast<double>(dim) * static_cast<double>(horizon);
  return clamp_window(detail::floor_pow(dt, 2.0 / 3.0), horizon);
}

std::int64_t resolve_window(const SwUcbOptions& opts, int dim, std::int64_t horizon) {
  switch (opts.rule) {
    case WindowRule::kFixed:
      if (opts.window < 1) throw ConfigError("sw-ucb: fixed window must be >= 1");
      return std::min(opts.window, horizon);
    case WindowRule::kKnownBudget: return swucb_window_for_known_budget(dim, horizon, opts.budget);
    case WindowRule::kUnknownBudget: return swucb_window_for_unknown_budget(dim, horizon);
    case WindowRule::kFullHorizon: return horizon;
  }
  throw InternalError("unhandled window rule");
}

EstimatorConfig make_ucb_estimator_config(const UcbSettings& ucb, int dim, std::int64_t horizon,
                                          std::int64_t window) {
  EstimatorConfig cfg;
  cfg.dim = dim;
  cfg.window = window;
  cfg.noise_proxy = ucb.noise_proxy;
  cfg.action_bound = ucb.action_bound;
  cfg.param_bound = ucb.param_bound;
  cfg.lambda = ucb.lambda.value_or(default_lambda(ucb.param_bound));
  cfg.delta = ucb.delta.value_or(1.0 / static_cast<double>(horizon));
  cfg.validate();
  return cfg;
}

std::size_t ucb_argmax(const SlidingWindowEstimator& est, double beta, const DecisionSet& actions) {
  if (actions.cols() == 0) throw DomainError("ucb_argmax: empty decision set");
  // scores equal up to rounding count as tied
  constexpr double kTieTolerance = 1e-12;
  const auto snap = est.snapshot();
  std::size_t best = 0;
  double best_score = snap.ucb_score(beta, actions.col(0));
  for (Eigen::Index k = 1; k < actions.cols(); ++k) {
    const double s = snap.ucb_score(beta, actions.col(k));
    if (s > best_score + kTieTolerance * std::max(1.0, std::abs(best_score))) {
      best_score = s;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

SwUcbPolicy::SwUcbPolicy(SwUcbOptions opts, std::string label) : opts_(opts), label_(std::move(label)) {}

std::int64_t SwUcbPolicy::window() const {
  if (!estimator_) throw ContractError(label_ + ": window() before reset()");
  return estimator_->config().window;
}

const EstimatorConfig& SwUcbPolicy::estimator_config() const {
  if (!estimator_) throw ContractError(label_ + ": estimator_config() before reset()");
  return estimator_->config();
}

void SwUcbPolicy::do_reset(const EpisodeContext& ctx) {
  const auto w = resolve_window(opts_, ctx.dim, ctx.horizon);
  const auto cfg = make_ucb_estimator_config(opts_.ucb, ctx.dim, ctx.horizon, w);
  estimator_.emplace(cfg);
  beta_ = confidence_radius(cfg);
  round_ = 0;
}

std::size_t SwUcbPolicy::do_choose(const DecisionSet& actions) { return ucb_argmax(*estimator_, beta_, actions); }

void SwUcbPolicy::do_observe(const Eigen::Ref<const Eigen::VectorXd>& action, std::size_t, double reward) {
  estimator_->push(action, reward, round_++);
}

SwUcbPolicy make_stationary_ucb(UcbSettings ucb) {
  SwUcbOptions opts;
  opts.rule = WindowRule::kFullHorizon;
  opts.ucb = ucb;
  return SwUcbPolicy(opts, "ucb");
}

std::size_t UniformRandomPolicy::do_choose(const DecisionSet& actions) {
  std::uniform_int_distribution<Eigen::Index> pick(0, actions.cols() - 1);
  return static_cast<std::size_t>(pick(rng_));
}

}  // namespace driftbandit
