#include "tdhorde/tidbd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tdhorde/errors.hpp"

namespace tdhorde {

void TidbdConfig::validate() const {
  // meta_step_size == 0 is allowed: it disables meta-descent, which is the
  // documented reduction to classic TD(lambda) relied on by tests.
  if (!(meta_step_size >= 0.0) || !std::isfinite(meta_step_size)) {
    throw ConfigError("tidbd: meta_step_size must be finite and >= 0, got " +
                      std::to_string(meta_step_size));
  }
  if (!(decay_time > 0.0) || !std::isfinite(decay_time)) {
    throw ConfigError("tidbd: decay_time must be finite and > 0, got " +
                      std::to_string(decay_time));
  }
  if (!(initial_step_size > 0.0) || !std::isfinite(initial_step_size)) {
    throw ConfigError("tidbd: initial_step_size must be finite and > 0, got " +
                      std::to_string(initial_step_size));
  }
  if (!(discount >= 0.0) || !(discount < 1.0)) {
    throw ConfigError("tidbd: discount must lie in [0, 1), got " + std::to_string(discount));
  }
  if (!(trace_decay >= 0.0) || !(trace_decay <= 1.0)) {
    throw ConfigError("tidbd: trace_decay must lie in [0, 1], got " +
                      std::to_string(trace_decay));
  }
  if (feature_count == 0) {
    throw ConfigError("tidbd: feature_count must be >= 1");
  }
}

TidbdLearner::TidbdLearner(const TidbdConfig& config) : cfg_(config) {
  cfg_.validate();
  const std::uint32_t n = cfg_.feature_count;
  w_.assign(n, 0.0);
  z_.assign(n, 0.0);
  beta_.assign(n, std::log(cfg_.initial_step_size));
  h_.assign(n, 0.0);
  xi_.assign(n, 0.0);
  // Set directly instead of exp(log(alpha0)), which can be off by one ulp:
  // the snapshot contract reports untouched features as exactly alpha0.
  alpha_.assign(n, cfg_.initial_step_size);
}

void TidbdLearner::check_features(const FeatureVector& x) const {
  if (x.length != cfg_.feature_count) {
    throw DataError("tidbd: feature vector length " + std::to_string(x.length) +
                    " does not match learner feature_count " +
                    std::to_string(cfg_.feature_count));
  }
}

double TidbdLearner::predict(const FeatureVector& x) const {
  check_features(x);
  double v = 0.0;
  for (std::uint32_t i : x.active) v += w_[i];
  return v;
}

TidbdStepInfo TidbdLearner::update(const FeatureVector& x_t, const FeatureVector& x_next,
                                   double cumulant) {
  check_features(x_t);
  check_features(x_next);
  if (!std::isfinite(cumulant)) {
    throw DataError("tidbd: cumulant is not finite");
  }

  const double delta = cumulant + cfg_.discount * predict(x_next) - predict(x_t);
  if (!std::isfinite(delta)) {
    throw DivergenceError("tidbd: TD error is not finite");
  }

  // Merge the two active sets in ascending index order. Outside this union
  // g_i and x_t_i are zero, so the xi update leaves xi unchanged (xi >= 0),
  // the beta update subtracts zero, and the normalizer terms vanish; skipping
  // those indices is exact.
  active_scratch_.clear();
  {
    const auto& at = x_t.active;
    const auto& an = x_next.active;
    std::size_t ti = 0;
    std::size_t ni = 0;
    while (ti < at.size() || ni < an.size()) {
      std::uint32_t idx;
      bool in_t = false;
      bool in_n = false;
      if (ni >= an.size() || (ti < at.size() && at[ti] < an[ni])) {
        idx = at[ti];
        in_t = true;
        ++ti;
      } else if (ti >= at.size() || an[ni] < at[ti]) {
        idx = an[ni];
        in_n = true;
        ++ni;
      } else {
        idx = at[ti];
        in_t = true;
        in_n = true;
        ++ti;
        ++ni;
      }
      const double xt = in_t ? 1.0 : 0.0;
      const double xn = in_n ? 1.0 : 0.0;
      const double g = cfg_.discount * xn - xt;
      active_scratch_.push_back(ActiveEntry{idx, xt, g, false, false});
    }
  }

  // Normalizer tracker and meta-weight descent, then the overshoot sum.
  // The sum uses the post-descent beta and the pre-update trace z.
  double overshoot_sum = 0.0;
  for (ActiveEntry& e : active_scratch_) {
    const std::uint32_t i = e.idx;
    e.touched = e.g != 0.0 || e.x_t != 0.0 || z_[i] != 0.0;
    if (xi_[i] < 0.0) {
      throw InvariantError("tidbd: xi went negative at feature " + std::to_string(i));
    }
    const double inner = cfg_.xi_consistent_form ? std::abs(delta * e.g * h_[i])
                                                 : std::abs(delta * e.x_t * h_[i]);
    xi_[i] = std::max(std::abs(delta * e.g * h_[i]),
                      xi_[i] - 1.0 / cfg_.decay_time * alpha_[i] * e.g * z_[i] * (inner - xi_[i]));
    if (!std::isfinite(xi_[i])) {
      throw DivergenceError("tidbd: xi is not finite at feature " + std::to_string(i));
    }
    if (xi_[i] > 0.0) {
      const double step = cfg_.meta_step_size * (1.0 / xi_[i]) * delta * e.g * h_[i];
      if (step != 0.0) {
        beta_[i] -= step;
        e.beta_changed = true;
      }
    }
    if (e.g != 0.0 && z_[i] != 0.0) {
      overshoot_sum += std::exp(beta_[i]) * e.g * z_[i];
    }
  }
  const double normalizer = std::max(-overshoot_sum, 1.0);
  if (!std::isfinite(normalizer)) {
    throw DivergenceError("tidbd: overshoot normalizer is not finite");
  }
  const double ln_m = normalizer > 1.0 ? std::log(normalizer) : 0.0;
  const bool renormalized = normalizer > 1.0;

  // Trace, weight, and update-trace pass over the union of the active sets
  // and the trace support. The normalizer shift applies only to touched
  // features (g, z, or x_t nonzero), so never-activated features keep their
  // initial step size exactly. The alpha cache is refreshed from beta only
  // where beta changed; elsewhere it already equals exp(beta).
  support_scratch_.clear();
  std::size_t ai = 0;
  std::size_t si = 0;
  bool finite = true;
  while (ai < active_scratch_.size() || si < trace_support_.size()) {
    std::uint32_t i;
    double xt;
    double g;
    bool touched;
    bool beta_changed;
    if (si >= trace_support_.size() ||
        (ai < active_scratch_.size() && active_scratch_[ai].idx <= trace_support_[si])) {
      const ActiveEntry& e = active_scratch_[ai];
      if (si < trace_support_.size() && trace_support_[si] == e.idx) ++si;
      i = e.idx;
      xt = e.x_t;
      g = e.g;
      touched = e.touched;
      beta_changed = e.beta_changed;
      ++ai;
    } else {
      i = trace_support_[si];
      xt = 0.0;
      g = 0.0;
      touched = true;  // z_[i] != 0 by the support invariant
      beta_changed = false;
      ++si;
    }
    if (touched && renormalized) {
      beta_[i] -= ln_m;
      alpha_[i] = std::exp(beta_[i]);
    } else if (beta_changed) {
      alpha_[i] = std::exp(beta_[i]);
    }
    z_[i] = z_[i] * cfg_.discount * cfg_.trace_decay + xt;
    w_[i] += alpha_[i] * delta * z_[i];
    h_[i] = h_[i] * std::max(1.0 + alpha_[i] * z_[i] * g, 0.0) + alpha_[i] * delta * z_[i];
    if (z_[i] != 0.0) {
      support_scratch_.push_back(i);
    }
    if (!std::isfinite(z_[i]) || !std::isfinite(w_[i]) || !std::isfinite(h_[i]) ||
        !std::isfinite(alpha_[i])) {
      finite = false;
    }
  }
  trace_support_.swap(support_scratch_);
  if (!finite) {
    throw DivergenceError("tidbd: learner state is not finite");
  }
  return TidbdStepInfo{delta, normalizer};
}

StepSizeSnapshot TidbdLearner::snapshot() const {
  const std::uint32_t n = cfg_.feature_count;
  StepSizeSnapshot snap;
  snap.feature_index.resize(n);
  std::iota(snap.feature_index.begin(), snap.feature_index.end(), 0u);
  snap.alpha = alpha_;
  snap.touched.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const bool untouched =
        alpha_[i] == cfg_.initial_step_size && h_[i] == 0.0 && z_[i] == 0.0;
    snap.touched[i] = untouched ? 0 : 1;
  }
  return snap;
}

std::size_t TidbdLearner::state_bytes() const {
  const std::size_t doubles = w_.capacity() + z_.capacity() + beta_.capacity() + h_.capacity() +
                              xi_.capacity() + alpha_.capacity();
  return doubles * sizeof(double) +
         (trace_support_.capacity() + support_scratch_.capacity()) * sizeof(std::uint32_t) +
         active_scratch_.capacity() * sizeof(ActiveEntry);
}

std::size_t TidbdLearner::extra_state_bytes() const {
  const std::size_t doubles =
      beta_.capacity() + h_.capacity() + xi_.capacity() + alpha_.capacity();
  return doubles * sizeof(double) + active_scratch_.capacity() * sizeof(ActiveEntry);
}

}  // namespace tdhorde
