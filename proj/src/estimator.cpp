#include "driftbandit/estimator.hpp"

#include <cmath>
#include <string>

#include "driftbandit/errors.hpp"

namespace driftbandit {

namespace {

// Relative slack allowed on ||x|| <= L before a push is rejected.
constexpr double kNormSlack = 1e-9;

}  // namespace

void EstimatorConfig::validate() const {
  if (dim < 1) throw ConfigError("estimator: dim must be >= 1");
  if (window < 1) throw ConfigError("estimator: window must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("estimator: lambda must be positive");
  if (!(noise_proxy >= 0.0) || !std::isfinite(noise_proxy)) throw DomainError("estimator: R must be >= 0");
  if (!(action_bound > 0.0) || !std::isfinite(action_bound)) throw DomainError("estimator: L must be positive");
  if (!(param_bound > 0.0) || !std::isfinite(param_bound)) throw DomainError("estimator: S must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("estimator: delta must lie in (0, 1]");
  if (lambda * param_bound * param_bound < 1.0 - 1e-12)
    throw DomainError("estimator: lambda must be >= 1/S^2 (got lambda=" + std::to_string(lambda) +
                      ", S=" + std::to_string(param_bound) + ")");
}

double default_lambda(double param_bound) {
  if (!(param_bound > 0.0)) throw DomainError("default_lambda: S must be positive");
  return std::max(1.0, 1.0 / (param_bound * param_bound));
}

double confidence_radius(const EstimatorConfig& cfg) {
  cfg.validate();
  const double w = static_cast<double>(cfg.window);
  const double L2 = cfg.action_bound * cfg.action_bound;
  const double log_term = std::log((1.0 + w * L2 / cfg.lambda) / cfg.delta);
  return cfg.noise_proxy * std::sqrt(cfg.dim * log_term) + std::sqrt(cfg.lambda) * cfg.param_bound;
}

// ---------------------------------------------------------------------------

ObservationWindow::ObservationWindow(int dim, std::int64_t capacity)
    : capacity_(capacity),
      xs_(dim, capacity),
      ys_(capacity),
      stamps_(static_cast<std::size_t>(capacity), 0) {
  if (dim < 1 || capacity < 1) throw ConfigError("ObservationWindow: dim and capacity must be >= 1");
}

std::optional<ObservationWindow::Entry> ObservationWindow::push(const Eigen::Ref<const Eigen::VectorXd>& x,
                                                                double y, std::int64_t stamp) {
  std::optional<Entry> evicted;
  std::int64_t dst;
  if (size_ == capacity_) {
    dst = head_;
    evicted = Entry{xs_.col(dst), ys_(dst), stamps_[static_cast<std::size_t>(dst)]};
    head_ = (head_ + 1) % capacity_;
  } else {
    dst = slot(size_);
    ++size_;
  }
  xs_.col(dst) = x;
  ys_(dst) = y;
  stamps_[static_cast<std::size_t>(dst)] = stamp;
  return evicted;
}

void ObservationWindow::clear() {
  head_ = 0;
  size_ = 0;
}

// ---------------------------------------------------------------------------

SlidingWindowEstimator::SlidingWindowEstimator(const EstimatorConfig& cfg)
    : cfg_((cfg.validate(), cfg)), window_(cfg.dim, cfg.window) {
  clear();
}

void SlidingWindowEstimator::check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != cfg_.dim)
    throw ConfigError("estimator: expected a " + std::to_string(cfg_.dim) + "-vector, got size " +
                      std::to_string(x.size()));
}

void SlidingWindowEstimator::push(const Eigen::Ref<const Eigen::VectorXd>& x, double y, std::int64_t stamp) {
  check_dim(x);
  if (x.norm() > cfg_.action_bound * (1.0 + kNormSlack))
    throw DomainError("estimator: ||x|| = " + std::to_string(x.norm()) + " exceeds L = " +
                      std::to_string(cfg_.action_bound));
  if (!std::isfinite(y)) throw DomainError("estimator: reward must be finite");

  auto evicted = window_.push(x, y, stamp);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0);
  moment_.noalias() += y * x;
#ifndef DRIFTBANDIT_FAULT_SKIP_EVICTION
  if (evicted) {
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(evicted->x, -1.0);
    moment_.noalias() -= evicted->y * evicted->x;
  }
  if (++pushes_since_refresh_ >= kRefreshInterval) rebuild();
#else
  (void)evicted;
#endif
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
}

void SlidingWindowEstimator::clear() {
  window_.clear();
  gram_ = cfg_.lambda * Eigen::MatrixXd::Identity(cfg_.dim, cfg_.dim);
  moment_ = Eigen::VectorXd::Zero(cfg_.dim);
  pushes_since_refresh_ = 0;
}

void SlidingWindowEstimator::rebuild() {
  gram_ = cfg_.lambda * Eigen::MatrixXd::Identity(cfg_.dim, cfg_.dim);
  moment_.setZero();
  for (std::int64_t i = 0; i < window_.size(); ++i) {
    gram_.noalias() += window_.x(i) * window_.x(i).transpose();
    moment_.noalias() += window_.y(i) * window_.x(i);
  }
  pushes_since_refresh_ = 0;
}

Eigen::VectorXd SlidingWindowEstimator::estimate() const { return Snapshot(*this).theta_hat(); }

double SlidingWindowEstimator::matrix_norm(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return Snapshot(*this).matrix_norm(x);
}

double SlidingWindowEstimator::ucb_score(double beta, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return Snapshot(*this).ucb_score(beta, x);
}

SlidingWindowEstimator::Snapshot::Snapshot(const SlidingWindowEstimator& est) : llt_(est.gram_) {
  if (llt_.info() != Eigen::Success) throw InternalError("estimator: Gram matrix is not positive definite");
  if (est.window_.empty()) {
    theta_hat_ = Eigen::VectorXd::Zero(est.cfg_.dim);
  } else {
    theta_hat_ = llt_.solve(est.moment_);
  }
}

double SlidingWindowEstimator::Snapshot::matrix_norm(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != theta_hat_.size()) throw DomainError("matrix_norm: dimension mismatch");
  Eigen::VectorXd z = llt_.matrixL().solve(x);
  return z.norm();
}

double SlidingWindowEstimator::Snapshot::ucb_score(double beta, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != theta_hat_.size()) throw DomainError("ucb_score: dimension mismatch");
  return x.dot(theta_hat_) + beta * matrix_norm(x);
}

}  // namespace driftbandit
