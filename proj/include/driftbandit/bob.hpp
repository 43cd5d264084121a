#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "driftbandit/exp3.hpp"
#include "driftbandit/policy.hpp"

namespace driftbandit {

// Block schedule of Bandit-over-Bandit, independent of the variation budget:
//
//   H       = floor(d^{2/3} T^{1/2})
//   Delta   = ceil(ln H)
//   J_j     = floor(H^{j/Delta}),  j = 0..Delta
//   gamma   = min(1, sqrt((Delta+1) ln(Delta+1) / ((e-1) ceil(T/H))))
//   q_cap   = 2H + 4R sqrt(H ln(T / sqrt(H)))     (block reward rescaling)
//
// Repeated entries of J are kept as distinct arms.
struct BobSchedule {
  std::int64_t horizon = 0;
  std::int64_t block_length = 0;
  int delta = 0;
  std::vector<std::int64_t> windows;
  double gamma = 1.0;
  double q_cap = 0.0;

  std::int64_t num_blocks() const { return (horizon + block_length - 1) / block_length; }
};

// Throws DomainError if T < 4 or d < 1. `block_length` overrides H.
BobSchedule bob_schedule(int dim, std::int64_t horizon, double noise_proxy,
                         std::optional<std::int64_t> block_length = std::nullopt);

// Lemma-style high-probability bound on a block's absolute reward sum:
// H + 2R sqrt(H ln(T / sqrt(H))).
double block_reward_threshold(std::int64_t block_length, std::int64_t horizon, double noise_proxy);

// clip(1/2 + block_reward / q_cap, 0, 1)
double rescale_block_reward(double block_reward, double q_cap);

struct BobOptions {
  UcbSettings ucb;
  std::optional<std::int64_t> block_length;
};

// Bandit-over-Bandit: EXP3 picks a window length from J at the start of each
// block of H rounds, and a fresh SW-UCB with that window plays the block.
// The total block reward, rescaled, is the EXP3 feedback.
class BobPolicy final : public Policy {
 public:
  struct BlockRecord {
    std::int64_t start = 0;
    std::int64_t length = 0;
    std::size_t arm = 0;
    std::int64_t window = 0;
    double probability = 0.0;
    double reward_sum = 0.0;
    double scaled_reward = 0.0;
  };

  explicit BobPolicy(BobOptions opts) : opts_(opts) {}

  std::string name() const override { return "bob"; }

  const BobSchedule& schedule() const { return schedule_; }
  const Exp3& exp3() const { return *exp3_; }
  Exp3& exp3() { return *exp3_; }

  // Samples the block's arm and window and resets the inner SW-UCB.
  // choose() calls this automatically at block boundaries.
  std::pair<std::size_t, std::int64_t> start_block();
  // Applies the EXP3 update for the open block. observe() calls this when
  // the block is full or the horizon is reached.
  void end_block();

  bool block_open() const { return block_open_; }
  std::int64_t rounds_in_block() const { return rounds_in_block_; }
  std::int64_t current_window() const { return current_window_; }
  const SwUcbPolicy& inner() const { return *inner_; }
  // Global round indices of the observations in the inner estimator's window.
  std::vector<std::int64_t> inner_window_rounds() const;
  const std::vector<BlockRecord>& blocks() const { return blocks_; }

 protected:
  void do_reset(const EpisodeContext& ctx) override;
  std::size_t do_choose(const DecisionSet& actions) override;
  void do_observe(const Eigen::Ref<const Eigen::VectorXd>& action, std::size_t index, double reward) override;

 private:
  BobOptions opts_;
  BobSchedule schedule_;
  std::optional<Exp3> exp3_;
  std::optional<SwUcbPolicy> inner_;
  Rng rng_;
  std::int64_t round_ = 0;
  bool block_open_ = false;
  std::int64_t block_start_ = 0;
  std::int64_t rounds_in_block_ = 0;
  std::size_t current_arm_ = 0;
  double current_prob_ = 0.0;
  std::int64_t current_window_ = 0;
  double block_reward_ = 0.0;
  std::vector<BlockRecord> blocks_;
};

}  // namespace driftbandit
