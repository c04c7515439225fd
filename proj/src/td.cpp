#include "tdhorde/td.hpp"

#include <cmath>
#include <string>

#include "tdhorde/errors.hpp"

namespace tdhorde {

void TdConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw ConfigError("td: step_size must be finite and > 0, got " + std::to_string(step_size));
  }
  if (!(discount >= 0.0) || !(discount < 1.0)) {
    throw ConfigError("td: discount must lie in [0, 1), got " + std::to_string(discount));
  }
  if (!(trace_decay >= 0.0) || !(trace_decay <= 1.0)) {
    throw ConfigError("td: trace_decay must lie in [0, 1], got " + std::to_string(trace_decay));
  }
  if (feature_count == 0) {
    throw ConfigError("td: feature_count must be >= 1");
  }
}

TdLearner::TdLearner(const TdConfig& config) : cfg_(config) {
  cfg_.validate();
  w_.assign(cfg_.feature_count, 0.0);
  z_.assign(cfg_.feature_count, 0.0);
}

void TdLearner::check_features(const FeatureVector& x) const {
  if (x.length != cfg_.feature_count) {
    throw DataError("td: feature vector length " + std::to_string(x.length) +
                    " does not match learner feature_count " + std::to_string(cfg_.feature_count));
  }
}

double TdLearner::predict(const FeatureVector& x) const {
  check_features(x);
  double v = 0.0;
  for (std::uint32_t i : x.active) v += w_[i];
  return v;
}

double TdLearner::update(const FeatureVector& x_t, const FeatureVector& x_next, double cumulant) {
  check_features(x_t);
  check_features(x_next);
  if (!std::isfinite(cumulant)) {
    throw DataError("td: cumulant is not finite");
  }

  const double delta = cumulant + cfg_.discount * predict(x_next) - predict(x_t);
  if (!std::isfinite(delta)) {
    throw DivergenceError("td: TD error is not finite");
  }

  // Walk the union of the current trace support and the active set of x_t in
  // ascending index order. Outside this union z is zero and stays zero, and
  // the weight increment alpha*delta*z vanishes, so skipping those indices is
  // exact, not an approximation.
  support_scratch_.clear();
  const auto& act = x_t.active;
  std::size_t si = 0;
  std::size_t ai = 0;
  bool weights_finite = true;
  while (si < trace_support_.size() || ai < act.size()) {
    std::uint32_t idx;
    bool in_xt;
    if (ai >= act.size() || (si < trace_support_.size() && trace_support_[si] < act[ai])) {
      idx = trace_support_[si];
      in_xt = false;
      ++si;
    } else {
      idx = act[ai];
      if (si < trace_support_.size() && trace_support_[si] == idx) ++si;
      in_xt = true;
      ++ai;
    }
    const double xi = in_xt ? 1.0 : 0.0;
    z_[idx] = z_[idx] * cfg_.discount * cfg_.trace_decay + xi;
    w_[idx] += cfg_.step_size * delta * z_[idx];
    if (z_[idx] != 0.0) {
      support_scratch_.push_back(idx);
      if (!std::isfinite(z_[idx]) || !std::isfinite(w_[idx])) weights_finite = false;
    }
  }
  trace_support_.swap(support_scratch_);
  if (!weights_finite) {
    throw DivergenceError("td: weights or traces are not finite");
  }
  return delta;
}

std::size_t TdLearner::state_bytes() const {
  return w_.capacity() * sizeof(double) + z_.capacity() * sizeof(double) +
         trace_support_.capacity() * sizeof(std::uint32_t) +
         support_scratch_.capacity() * sizeof(std::uint32_t);
}

}  // namespace tdhorde
