#pragma once

#include <cstdint>
#include <vector>

#include "tdhorde/feature.hpp"

namespace tdhorde {

struct TidbdConfig {
  double meta_step_size = 0.0;     // theta >= 0; 0 disables adaptation (reduces to TD)
  double decay_time = 0.0;         // tau > 0, time constant of the xi tracker
  double initial_step_size = 0.0;  // alpha0 > 0
  double discount = 0.0;           // gamma in [0, 1)
  double trace_decay = 0.0;        // lambda in [0, 1]
  std::uint32_t feature_count = 0;
  // The printed update for xi decays it toward |delta * x_t_i * h_i| while its
  // lower bound is |delta * g_i * h_i|. When true, the decay target uses g_i
  // as well (the form consistent with the AutoStep literature). Default keeps
  // the printed form.
  bool xi_consistent_form = false;

  void validate() const;  // throws ConfigError
};

struct TidbdStepInfo {
  double delta = 0.0;       // TD error of this step
  double normalizer = 0.0;  // M >= 1; 1 means no overshoot correction occurred
};

struct StepSizeSnapshot {
  std::vector<std::uint32_t> feature_index;
  std::vector<double> alpha;
  // 0 for features still at their initial state (alpha == alpha0, h == z == 0),
  // 1 for features whose learner state has adapted.
  std::vector<std::uint8_t> touched;
};

/// TD(lambda) whose per-feature step sizes alpha_i = exp(beta_i) adapt online
/// by normalized stochastic meta-descent. Per step, with
/// g_i = gamma*x_next_i - x_t_i:
///
///   delta = C + gamma*w.x_next - w.x_t
///   xi_i   <- max(|delta*g_i*h_i|,
///                 xi_i - (1/tau)*alpha_i*g_i*z_i*(|delta*x_t_i*h_i| - xi_i))
///   beta_i <- beta_i - theta*(1/xi_i)*delta*g_i*h_i   (skipped when xi_i == 0)
///   M      = max(-sum_i exp(beta_i)*g_i*z_i, 1)
///   beta_i <- beta_i - ln M;  alpha_i <- exp(beta_i)
///   z_i    <- z_i*gamma*lambda + x_t_i
///   w_i    <- w_i + alpha_i*delta*z_i
///   h_i    <- h_i*max(1 + alpha_i*z_i*g_i, 0) + alpha_i*delta*z_i
///
/// All per-feature updates run only over indices with g_i, z_i, or x_t_i
/// nonzero; everywhere else each update is an exact no-op, so features that
/// were never active keep alpha_i = alpha0. Updates walk indices in ascending
/// order and use the same expression forms as a dense evaluation, so results
/// match a naive dense implementation to floating-point roundoff.
class TidbdLearner {
 public:
  explicit TidbdLearner(const TidbdConfig& config);

  double predict(const FeatureVector& x) const;

  /// One update step; returns the TD error and the overshoot normalizer M.
  /// Throws DivergenceError on any non-finite value and InvariantError if a
  /// xi entry is found negative.
  TidbdStepInfo update(const FeatureVector& x_t, const FeatureVector& x_next, double cumulant);

  const TidbdConfig& config() const { return cfg_; }
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& trace() const { return z_; }
  const std::vector<double>& meta_weights() const { return beta_; }
  const std::vector<double>& update_trace() const { return h_; }
  const std::vector<double>& xi() const { return xi_; }
  const std::vector<double>& step_sizes() const { return alpha_; }

  /// Per-feature step sizes with a touched flag, ready for histograms and
  /// snapshot CSVs.
  StepSizeSnapshot snapshot() const;

  /// Bytes held in all learner state vectors.
  std::size_t state_bytes() const;
  /// Bytes held beyond what classic TD(lambda) keeps (beta, h, xi, alpha).
  std::size_t extra_state_bytes() const;

 private:
  struct ActiveEntry {
    std::uint32_t idx;
    double x_t;  // 0.0 or 1.0
    double g;
    bool touched;
    bool beta_changed;
  };

  void check_features(const FeatureVector& x) const;

  TidbdConfig cfg_;
  std::vector<double> w_;
  std::vector<double> z_;
  std::vector<double> beta_;
  std::vector<double> h_;
  std::vector<double> xi_;
  std::vector<double> alpha_;
  std::vector<std::uint32_t> trace_support_;  // ascending indices with z != 0
  std::vector<std::uint32_t> support_scratch_;
  std::vector<ActiveEntry> active_scratch_;
};

}  // namespace tdhorde
