#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "driftbandit/environment.hpp"
#include "driftbandit/estimator.hpp"
#include "driftbandit/rng.hpp"

namespace driftbandit {

struct EpisodeContext {
  std::int64_t horizon = 1;
  int dim = 1;
  std::uint64_t seed = 0;
};

// Sequential decision maker. Policies see decision sets and their own rewards,
// never the environment's parameters.
//
// choose() and observe() must alternate; the base class enforces it.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  // Set by policies built for one dimension only; the harness rejects other environments.
  virtual std::optional<int> fixed_dim() const { return std::nullopt; }

  void reset(const EpisodeContext& ctx);
  // Index of the chosen column of `actions`. Throws DomainError on an empty set.
  std::size_t choose(const DecisionSet& actions);
  // Throws ContractError unless `action` is the index returned by the last choose().
  void observe(std::size_t action, double reward);

  const EpisodeContext& context() const { return ctx_; }

 protected:
  virtual void do_reset(const EpisodeContext& ctx) = 0;
  virtual std::size_t do_choose(const DecisionSet& actions) = 0;
  virtual void do_observe(const Eigen::Ref<const Eigen::VectorXd>& action, std::size_t index, double reward) = 0;

 private:
  EpisodeContext ctx_;
  bool ready_ = false;
  std::optional<std::size_t> pending_;
  Eigen::VectorXd pending_action_;
};

// Window length rules for SW-UCB.
//   kFixed          w given explicitly
//   kKnownBudget    floor((dT)^{2/3} (B_T + 1)^{-2/3})
//   kUnknownBudget  floor((dT)^{2/3})
//   kFullHorizon    w = T (stationary OFUL-style UCB)
enum class WindowRule { kFixed, kKnownBudget, kUnknownBudget, kFullHorizon };

std::int64_t swucb_window_for_known_budget(int dim, std::int64_t horizon, double budget);
std::int64_t swucb_window_for_unknown_budget(int dim, std::int64_t horizon);

// Bounds and overrides shared by the UCB-family policies. Unset lambda means
// max(1, 1/S^2); unset delta means 1/T.
struct UcbSettings {
  double noise_proxy = 0.1;
  double action_bound = 1.0;
  double param_bound = 1.0;
  std::optional<double> lambda;
  std::optional<double> delta;
};

struct SwUcbOptions {
  WindowRule rule = WindowRule::kUnknownBudget;
  std::int64_t window = 0;  // kFixed only
  double budget = 0.0;      // kKnownBudget only
  UcbSettings ucb;
};

// Resolves the window rule for (d, T); always within [1, T].
std::int64_t resolve_window(const SwUcbOptions& opts, int dim, std::int64_t horizon);

// Sliding-window UCB: estimate from the last w observations, then pick the
// action maximizing <x, theta_hat> + beta ||x||_{V^{-1}}. Ties go to the lowest index.
class SwUcbPolicy final : public Policy {
 public:
  explicit SwUcbPolicy(SwUcbOptions opts, std::string label = "sw-ucb");

  std::string name() const override { return label_; }

  double beta() const { return beta_; }
  std::int64_t window() const;
  const SlidingWindowEstimator& estimator() const { return *estimator_; }
  const EstimatorConfig& estimator_config() const;

 protected:
  void do_reset(const EpisodeContext& ctx) override;
  std::size_t do_choose(const DecisionSet& actions) override;
  void do_observe(const Eigen::Ref<const Eigen::VectorXd>& action, std::size_t index, double reward) override;

 private:
  SwUcbOptions opts_;
  std::string label_;
  std::optional<SlidingWindowEstimator> estimator_;
  double beta_ = 0.0;
  std::int64_t round_ = 0;
};

// Estimator configuration of SW-UCB with window w for an episode (lambda and
// delta defaults applied).
EstimatorConfig make_ucb_estimator_config(const UcbSettings& ucb, int dim, std::int64_t horizon,
                                          std::int64_t window);

// Lowest-index argmax of the UCB scores under one factorization of V. Scores within
// a relative 1e-12 of the running best count as tied.
std::size_t ucb_argmax(const SlidingWindowEstimator& est, double beta, const DecisionSet& actions);

// SW-UCB with w = T.
SwUcbPolicy make_stationary_ucb(UcbSettings ucb);

// Uniformly random arm; a floor for comparisons.
class UniformRandomPolicy final : public Policy {
 public:
  std::string name() const override { return "uniform"; }

 protected:
  void do_reset(const EpisodeContext& ctx) override { rng_.seed(ctx.seed); }
  std::size_t do_choose(const DecisionSet& actions) override;
  void do_observe(const Eigen::Ref<const Eigen::VectorXd>&, std::size_t, double) override {}

 private:
  Rng rng_;
};

}  // namespace driftbandit
