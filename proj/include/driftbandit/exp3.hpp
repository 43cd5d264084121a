#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "driftbandit/policy.hpp"
#include "driftbandit/rng.hpp"

namespace driftbandit {

// EXP3 over K arms with exploration rate gamma.
//
//   p_j = (1 - gamma) s_j / sum_u s_u + gamma / K
//   s_j <- s_j exp(gamma / (K p_j) r)   for the played arm, r in [0, 1]
//
// Weights are held as logarithms so they stay finite over any number of
// updates; probabilities are computed with the max log-weight subtracted.
class Exp3 {
 public:
  Exp3(std::size_t arms, double gamma);

  std::size_t arms() const { return log_weights_.size(); }
  double gamma() const { return gamma_; }

  std::vector<double> probabilities() const;
  std::size_t sample(Rng& rng) const;

  // `prob` is the probability with which `arm` was drawn.
  void update(std::size_t arm, double reward, double prob);

  std::span<const double> log_weights() const { return log_weights_; }
  // exp of the log-weights; may overflow for long runs, intended for inspection.
  std::vector<double> weights() const;
  void set_weights(std::span<const double> weights);

 private:
  double gamma_;
  std::vector<double> log_weights_;
};

// Draws an index from a probability vector using one uniform variate.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

// EXP3.S (exponential weights with uniform weight sharing) for K-armed
// problems with standard basis decision sets. Tuned for a known budget B:
//   alpha = 1/T,  gamma = min(1, (2 B K ln(KT) / ((e-1)^2 T))^{1/3}).
// Rewards are clipped to [0, 1] before importance weighting.
class Exp3SPolicy final : public Policy {
 public:
  explicit Exp3SPolicy(double budget) : budget_(budget) {}

  std::string name() const override { return "exp3s"; }

  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& probabilities() const { return probs_; }

 protected:
  void do_reset(const EpisodeContext& ctx) override;
  std::size_t do_choose(const DecisionSet& actions) override;
  void do_observe(const Eigen::Ref<const Eigen::VectorXd>& action, std::size_t index, double reward) override;

 private:
  void configure(std::size_t arms);

  double budget_;
  double gamma_ = 0.0;
  double alpha_ = 0.0;
  Rng rng_;
  std::vector<double> weights_;
  std::vector<double> probs_;
  std::size_t last_arm_ = 0;
};

// Arm index of each column of a standard basis decision set; DomainError otherwise.
std::vector<Eigen::Index> basis_arms(const DecisionSet& actions);

}  // namespace driftbandit
