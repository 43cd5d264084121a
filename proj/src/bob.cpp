#include "driftbandit/bob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "driftbandit/errors.hpp"
#include "numeric.hpp"

namespace driftbandit {

BobSchedule bob_schedule(int dim, std::int64_t horizon, double noise_proxy, std::optional<std::int64_t> block_length) {
  if (dim < 1) throw DomainError("bob: d must be >= 1");
  if (horizon < 4) throw DomainError("bob: T must be >= 4");
  if (!(noise_proxy >= 0.0)) throw DomainError("bob: R must be >= 0");

  BobSchedule s;
  s.horizon = horizon;
  if (block_length) {
    if (*block_length < 2) throw DomainError("bob: block length must be >= 2");
    s.block_length = *block_length;
  } else {
    const double h = std::floor(detail::snap(std::pow(static_cast<double>(dim), 2.0 / 3.0) *
                                             std::sqrt(static_cast<double>(horizon))));
    s.block_length = static_cast<std::int64_t>(h);
  }
  if (s.block_length < 2) throw DomainError("bob: T too small for a block length of at least 2");

  const double h = static_cast<double>(s.block_length);
  s.delta = static_cast<int>(std::ceil(std::log(h)));
  for (int j = 0; j <= s.delta; ++j)
    s.windows.push_back(static_cast<std::int64_t>(detail::floor_pow(h, static_cast<double>(j) / s.delta)));

  const double arms = s.delta + 1.0;
  const double blocks = static_cast<double>(s.num_blocks());
  s.gamma = std::min(1.0, std::sqrt(arms * std::log(arms) / ((std::numbers::e - 1.0) * blocks)));
  const double log_term = std::max(0.0, std::log(static_cast<double>(horizon) / std::sqrt(h)));
  s.q_cap = 2.0 * h + 4.0 * noise_proxy * std::sqrt(h * log_term);
  return s;
}

double block_reward_threshold(std::int64_t block_length, std::int64_t horizon, double noise_proxy) {
  const double h = static_cast<double>(block_length);
  const double log_term = std::max(0.0, std::log(static_cast<double>(horizon) / std::sqrt(h)));
  return h + 2.0 * noise_proxy * std::sqrt(h * log_term);
}

double rescale_block_reward(double block_reward, double q_cap) {
  if (!(q_cap > 0.0)) throw DomainError("bob: rescaling constant must be positive");
  return std::clamp(0.5 + block_reward / q_cap, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

void BobPolicy::do_reset(const EpisodeContext& ctx) {
  schedule_ = bob_schedule(ctx.dim, ctx.horizon, opts_.ucb.noise_proxy, opts_.block_length);
  exp3_.emplace(schedule_.windows.size(), schedule_.gamma);
  inner_.reset();
  rng_.seed(ctx.seed);
  round_ = 0;
  block_open_ = false;
  block_start_ = 0;
  rounds_in_block_ = 0;
  current_window_ = 0;
  block_reward_ = 0.0;
  blocks_.clear();
}

std::pair<std::size_t, std::int64_t> BobPolicy::start_block() {
  if (!exp3_) throw ContractError("bob: start_block() before reset()");
  if (block_open_) throw ContractError("bob: start_block() while a block is open");
  if (round_ >= context().horizon) throw ContractError("bob: horizon exhausted");

  const auto probs = exp3_->probabilities();
  current_arm_ = sample_index(probs, rng_);
  current_prob_ = probs[current_arm_];
  current_window_ = schedule_.windows[current_arm_];

  SwUcbOptions inner_opts;
  inner_opts.rule = WindowRule::kFixed;
  inner_opts.window = current_window_;
  inner_opts.ucb = opts_.ucb;
  inner_.emplace(inner_opts, "bob/sw-ucb");
  // Full-horizon context: delta defaults to 1/T inside the inner radius.
  inner_->reset(EpisodeContext{context().horizon, context().dim, context().seed});

  block_open_ = true;
  block_start_ = round_;
  rounds_in_block_ = 0;
  block_reward_ = 0.0;
  return {current_arm_, current_window_};
}

void BobPolicy::end_block() {
  if (!block_open_) throw ContractError("bob: end_block() without an open block");
  if (rounds_in_block_ < 1) throw ContractError("bob: end_block() on an empty block");
  const double r = rescale_block_reward(block_reward_, schedule_.q_cap);
  exp3_->update(current_arm_, r, current_prob_);
  blocks_.push_back(BlockRecord{block_start_, rounds_in_block_, current_arm_, current_window_, current_prob_,
                                block_reward_, r});
  block_open_ = false;
}

std::vector<std::int64_t> BobPolicy::inner_window_rounds() const {
  std::vector<std::int64_t> rounds;
  if (!inner_) return rounds;
  const auto& win = inner_->estimator().window();
  for (std::int64_t i = 0; i < win.size(); ++i) rounds.push_back(block_start_ + win.stamp(i));
  return rounds;
}

std::size_t BobPolicy::do_choose(const DecisionSet& actions) {
  if (!block_open_) start_block();
  return inner_->choose(actions);
}

void BobPolicy::do_observe(const Eigen::Ref<const Eigen::VectorXd>&, std::size_t index, double reward) {
  inner_->observe(index, reward);
  block_reward_ += reward;
  ++rounds_in_block_;
  ++round_;
  if (rounds_in_block_ == schedule_.block_length || round_ == context().horizon) end_block();
}

}  // namespace driftbandit
