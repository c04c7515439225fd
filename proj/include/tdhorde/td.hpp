#pragma once

#include <cstdint>
#include <vector>

#include "tdhorde/feature.hpp"

namespace tdhorde {

struct TdConfig {
  double step_size = 0.0;    // alpha > 0
  double discount = 0.0;     // gamma in [0, 1)
  double trace_decay = 0.0;  // lambda in [0, 1]
  std::uint32_t feature_count = 0;

  void validate() const;  // throws ConfigError
};

/// Linear TD(lambda) with accumulating eligibility traces and one scalar step
/// size. Updates run over the union of the trace support and the active
/// features; everywhere else every update term is exactly zero, so results
/// match a dense computation bit for bit.
class TdLearner {
 public:
  explicit TdLearner(const TdConfig& config);

  /// V(s) = w . x(s); a sparse sum over the active indices.
  double predict(const FeatureVector& x) const;

  /// One TD(lambda) step: delta = C + gamma*w.x' - w.x, then z <- gamma*lambda*z + x,
  /// then w <- w + alpha*delta*z. Returns delta. Throws DivergenceError on any
  /// non-finite value.
  double update(const FeatureVector& x_t, const FeatureVector& x_next, double cumulant);

  const TdConfig& config() const { return cfg_; }
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& trace() const { return z_; }

  /// Bytes held in learner state vectors (weights, trace, trace support).
  std::size_t state_bytes() const;

 private:
  void check_features(const FeatureVector& x) const;

  TdConfig cfg_;
  std::vector<double> w_;
  std::vector<double> z_;
  std::vector<std::uint32_t> trace_support_;  // ascending indices with z != 0
  std::vector<std::uint32_t> support_scratch_;
};

}  // namespace tdhorde
