#include "driftbandit/exp3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "driftbandit/errors.hpp"

namespace driftbandit {

Exp3::Exp3(std::size_t arms, double gamma) : gamma_(gamma), log_weights_(arms, 0.0) {
  if (arms == 0) throw DomainError("exp3: need at least one arm");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("exp3: gamma must lie in (0, 1]");
}

std::vector<double> Exp3::probabilities() const {
  const double k = static_cast<double>(arms());
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  std::vector<double> p(arms());
  double total = 0.0;
  for (std::size_t j = 0; j < arms(); ++j) total += p[j] = std::exp(log_weights_[j] - top);
  for (auto& v : p) v = (1.0 - gamma_) * v / total + gamma_ / k;
  return p;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    cum += probs[j];
    if (u < cum) return j;
  }
  return probs.size() - 1;
}

std::size_t Exp3::sample(Rng& rng) const {
  const auto p = probabilities();
  return sample_index(p, rng);
}

void Exp3::update(std::size_t arm, double reward, double prob) {
  if (arm >= arms()) throw DomainError("exp3: arm index out of range");
  if (!(reward >= 0.0 && reward <= 1.0)) throw DomainError("exp3: reward must lie in [0, 1]");
  if (!(prob > 0.0 && prob <= 1.0 + 1e-12)) throw DomainError("exp3: probability must lie in (0, 1]");
  log_weights_[arm] += gamma_ / (static_cast<double>(arms()) * prob) * reward;
}

std::vector<double> Exp3::weights() const {
  std::vector<double> w(arms());
  std::transform(log_weights_.begin(), log_weights_.end(), w.begin(), [](double l) { return std::exp(l); });
  return w;
}

void Exp3::set_weights(std::span<const double> weights) {
  if (weights.size() != arms()) throw DomainError("exp3: weight count mismatch");
  for (std::size_t j = 0; j < arms(); ++j) {
    if (!(weights[j] > 0.0) || !std::isfinite(weights[j])) throw DomainError("exp3: weights must be positive");
    log_weights_[j] = std::log(weights[j]);
  }
}

// ---------------------------------------------------------------------------

std::vector<Eigen::Index> basis_arms(const DecisionSet& actions) {
  std::vector<Eigen::Index> arms;
  arms.reserve(static_cast<std::size_t>(actions.cols()));
  for (Eigen::Index c = 0; c < actions.cols(); ++c) {
    Eigen::Index idx;
    const double top = actions.col(c).maxCoeff(&idx);
    const bool unit = top == 1.0 && actions.col(c).cwiseAbs().sum() == 1.0;
    if (!unit) throw DomainError("exp3s: decision set must consist of standard basis vectors");
    if (std::find(arms.begin(), arms.end(), idx) != arms.end())
      throw DomainError("exp3s: repeated basis vector in decision set");
    arms.push_back(idx);
  }
  return arms;
}

void Exp3SPolicy::configure(std::size_t arms) {
  const double k = static_cast<double>(arms);
  const double t = static_cast<double>(context().horizon);
  const double e1 = std::numbers::e - 1.0;
  alpha_ = 1.0 / t;
  gamma_ = std::min(1.0, std::cbrt(2.0 * budget_ * k * std::log(k * t) / (e1 * e1 * t)));
  weights_.assign(arms, 1.0 / k);
  probs_.assign(arms, 1.0 / k);
}

void Exp3SPolicy::do_reset(const EpisodeContext& ctx) {
  if (!(budget_ >= 0.0)) throw DomainError("exp3s: budget must be >= 0");
  rng_.seed(ctx.seed);
  weights_.clear();
  probs_.clear();
}

std::size_t Exp3SPolicy::do_choose(const DecisionSet& actions) {
  const auto arms = basis_arms(actions);
  if (weights_.empty()) configure(arms.size());
  if (arms.size() != weights_.size()) throw DomainError("exp3s: number of arms changed mid-episode");
  const double k = static_cast<double>(weights_.size());
  double total = 0.0;
  for (double w : weights_) total += w;
  for (std::size_t j = 0; j < weights_.size(); ++j) probs_[j] = (1.0 - gamma_) * weights_[j] / total + gamma_ / k;
  last_arm_ = sample_index(probs_, rng_);
  return last_arm_;
}

void Exp3SPolicy::do_observe(const Eigen::Ref<const Eigen::VectorXd>&, std::size_t index, double reward) {
  const double k = static_cast<double>(weights_.size());
  const double r = std::clamp(reward, 0.0, 1.0);
  double total = 0.0;
  for (double w : weights_) total += w;
  const double share = std::numbers::e * alpha_ / k * total;
  weights_[index] *= std::exp(gamma_ * (r / probs_[index]) / k);
  double next_total = 0.0;
  for (auto& w : weights_) next_total += (w += share);
  // The update is scale invariant; renormalize to keep weights in range.
  for (auto& w : weights_) w /= next_total;
}

}  // namespace driftbandit
