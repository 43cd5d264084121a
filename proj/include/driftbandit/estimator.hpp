#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace driftbandit {

// Parameters of the sliding-window ridge estimator and its confidence radius.
//
//   dim           d, dimension of actions and parameters
//   window        w, number of most recent observations retained
//   lambda        ridge regularizer; must satisfy lambda >= 1/S^2
//   noise_proxy   R, sub-Gaussian variance proxy of the reward noise
//   action_bound  L, bound on ||x||
//   param_bound   S, bound on ||theta_t||
//   delta         confidence failure probability in (0, 1]
struct EstimatorConfig {
  int dim = 1;
  std::int64_t window = 1;
  double lambda = 1.0;
  double noise_proxy = 0.0;
  double action_bound = 1.0;
  double param_bound = 1.0;
  double delta = 0.05;

  // Throws ConfigError (sizes) or DomainError (bounds, delta) when invalid.
  void validate() const;
};

// lambda = max(1, 1/S^2); the smallest ridge that keeps beta >= 1.
double default_lambda(double param_bound);

// beta = R sqrt(d ln((1 + w L^2 / lambda) / delta)) + sqrt(lambda) S
double confidence_radius(const EstimatorConfig& cfg);

// Bounded FIFO of (x, y, stamp) triples stored in a ring buffer. The stamp is
// an opaque caller-supplied tag (usually the round index) kept for auditing.
class ObservationWindow {
 public:
  struct Entry {
    Eigen::VectorXd x;
    double y = 0.0;
    std::int64_t stamp = 0;
  };

  ObservationWindow(int dim, std::int64_t capacity);

  // Appends and returns the evicted entry, if any.
  std::optional<Entry> push(const Eigen::Ref<const Eigen::VectorXd>& x, double y, std::int64_t stamp);
  void clear();

  std::int64_t size() const { return size_; }
  std::int64_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  // i = 0 is the oldest retained entry.
  Eigen::Ref<const Eigen::VectorXd> x(std::int64_t i) const { return xs_.col(slot(i)); }
  double y(std::int64_t i) const { return ys_(slot(i)); }
  std::int64_t stamp(std::int64_t i) const { return stamps_[static_cast<std::size_t>(slot(i))]; }

 private:
  std::int64_t slot(std::int64_t i) const { return (head_ + i) % capacity_; }

  std::int64_t capacity_;
  std::int64_t head_ = 0;
  std::int64_t size_ = 0;
  Eigen::MatrixXd xs_;
  Eigen::VectorXd ys_;
  std::vector<std::int64_t> stamps_;
};

// Sliding-window regularized least squares.
//
// Keeps V = lambda I + sum x x^T and b = sum x y over the retained window,
// updated by rank-one add/subtract, and rebuilt from the stored window every
// kRefreshInterval pushes. Solves go through a fresh Cholesky factorization.
class SlidingWindowEstimator {
 public:
  static constexpr std::int64_t kRefreshInterval = 1024;

  explicit SlidingWindowEstimator(const EstimatorConfig& cfg);

  const EstimatorConfig& config() const { return cfg_; }

  // Throws ConfigError on dimension mismatch, DomainError if ||x|| > L.
  void push(const Eigen::Ref<const Eigen::VectorXd>& x, double y, std::int64_t stamp = 0);
  void clear();

  // Recomputes V and b from the retained entries.
  void rebuild();

  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& moment() const { return moment_; }
  const ObservationWindow& window() const { return window_; }

  // Solution of V theta = b. Zero when the window is empty.
  Eigen::VectorXd estimate() const;

  // sqrt(x^T V^{-1} x), computed by a triangular solve.
  double matrix_norm(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // <x, theta_hat> + beta ||x||_{V^{-1}}
  double ucb_score(double beta, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Factorizes V once so that many actions can be scored in one round.
  class Snapshot {
   public:
    explicit Snapshot(const SlidingWindowEstimator& est);
    const Eigen::VectorXd& theta_hat() const { return theta_hat_; }
    double matrix_norm(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double ucb_score(double beta, const Eigen::Ref<const Eigen::VectorXd>& x) const;

   private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd theta_hat_;
  };

  Snapshot snapshot() const { return Snapshot(*this); }

 private:
  void check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  EstimatorConfig cfg_;
  ObservationWindow window_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
  std::int64_t pushes_since_refresh_ = 0;
};

}  // namespace driftbandit
