#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "driftbandit/rng.hpp"

namespace YAML {
class Node;
}

namespace driftbandit {

// Finite decision set; each column is one action.
using DecisionSet = Eigen::MatrixXd;

// Gaussian reward noise with standard deviation R (an R-sub-Gaussian law).
struct NoiseModel {
  double sd = 0.0;

  double sample(Rng& rng) const;
};

// A drifting linear bandit instance with rounds indexed 0..T-1.
//
// theta_t is stored column-wise. Decision sets are shared between runs of
// `set_stride` consecutive rounds: round t uses set min(t / stride, n_sets-1).
class DriftingEnvironment {
 public:
  DriftingEnvironment(Eigen::MatrixXd thetas, std::vector<DecisionSet> decision_sets, std::int64_t set_stride,
                      NoiseModel noise, double declared_budget, double nominal_budget);

  std::int64_t horizon() const { return thetas_.cols(); }
  int dim() const { return static_cast<int>(thetas_.rows()); }

  Eigen::Ref<const Eigen::VectorXd> theta(std::int64_t t) const;
  const Eigen::MatrixXd& thetas() const { return thetas_; }
  const DecisionSet& decision_set(std::int64_t t) const;
  const std::vector<DecisionSet>& decision_sets() const { return decision_sets_; }
  std::int64_t set_stride() const { return set_stride_; }
  const NoiseModel& noise() const { return noise_; }

  // Upper bound on the total variation this instance promises.
  double declared_budget() const { return declared_budget_; }
  // The B_T parameter the instance was generated from (what tuned policies see).
  double nominal_budget() const { return nominal_budget_; }

  // <x, theta_t> + eta with eta drawn from the noise model.
  double reward(std::int64_t t, const Eigen::Ref<const Eigen::VectorXd>& x, Rng& rng) const;
  double mean_reward(std::int64_t t, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // argmax_x <x, theta_t> over the round's decision set; lowest index wins ties.
  std::size_t best_action_index(std::int64_t t) const;
  Eigen::VectorXd best_action(std::int64_t t) const;

  // Max of ||theta_t||, ||x|| and |<x, theta_t>| over the whole instance.
  double max_param_norm() const;
  double max_action_norm() const;
  double max_abs_mean_reward() const;

 private:
  void check_round(std::int64_t t) const;

  Eigen::MatrixXd thetas_;
  std::vector<DecisionSet> decision_sets_;
  std::int64_t set_stride_;
  NoiseModel noise_;
  double declared_budget_;
  double nominal_budget_;
};

// sum_{t} ||theta_{t+1} - theta_t||
double variation(const DriftingEnvironment& env);

// Index of the largest <x, theta> over the columns of `actions`; lowest index on ties.
std::size_t argmax_reward(const DecisionSet& actions, const Eigen::Ref<const Eigen::VectorXd>& theta);

// Two-armed experiment: theta_t = (0.5 + 0.3 sin(5 B pi t / T), 0.5 + 0.3 sin(pi + 5 B pi t / T)),
// t = 1..T, decision set {e1, e2}.
DriftingEnvironment make_sinusoidal(std::int64_t horizon, double budget, double noise_sd);

// Bound on the sinusoidal instance's variation: 0.6 sqrt(2) ceil(5 B).
double sinusoidal_budget_bound(double budget);

// Block length ceil((dT)^{2/3} B^{-2/3}) of the block-switching construction,
// raised to at least ceil(d^2/4) so that ||theta|| = d / (2 sqrt(H)) <= 1.
std::int64_t lower_bound_block_length(int dim, std::int64_t horizon, double budget);

// Piecewise-constant theta with coordinates +-sqrt(d / 4H) redrawn per block.
// Each block's decision set holds the 2d signed basis vectors followed by the
// block's optimal unit direction.
DriftingEnvironment make_lower_bound_instance(int dim, std::int64_t horizon, double budget, double noise_sd,
                                              Rng& rng);

// Random walk of constant step B / (T - 1) inside the ball of radius S <= 1.
// Fixed decision set of `num_actions` random unit vectors.
DriftingEnvironment make_budgeted_random_walk(int dim, std::int64_t horizon, double budget, double noise_sd,
                                              int num_actions, double param_bound, Rng& rng);

// ---------------------------------------------------------------------------
// Serializable environment description.

enum class ThetaProcess { kConstant, kSinusoidal, kLowerBoundBlocks, kBudgetedRandomWalk };

std::string to_string(ThetaProcess kind);
ThetaProcess theta_process_from_string(const std::string& name);

struct EnvironmentSpec {
  ThetaProcess kind = ThetaProcess::kSinusoidal;
  int dim = 2;
  // B_T = budget * T^budget_exponent.
  double budget = 1.0;
  double budget_exponent = 0.0;
  double noise_sd = 0.1;
  int num_actions = 4;       // random walk only
  double param_bound = 1.0;  // random walk only
  std::vector<double> theta;  // constant only; defaults to 0.6 e1 + 0.4 e2
  // Mixed into the generation stream of randomized processes.
  std::uint64_t seed = 0;

  double budget_for(std::int64_t horizon) const;
  void validate() const;
  DriftingEnvironment build(std::int64_t horizon, Rng& rng) const;
};

// Reads a mapping node. Unknown keys and bad types raise ConfigError naming the line.
EnvironmentSpec environment_spec_from_yaml(const YAML::Node& node);
void environment_spec_to_yaml(const EnvironmentSpec& spec, std::ostream& out);

// Header "t,theta_1,...,theta_d"; t runs from 1.
void write_theta_csv(const DriftingEnvironment& env, std::ostream& out);

}  // namespace driftbandit
