#include "tdhorde/horde.hpp"

#include <exception>
#include <string>
#include <thread>
#include <utility>

#include "tdhorde/errors.hpp"

namespace tdhorde {

double GvfSpec::discount() const {
  return kind == LearnerKind::classic_td ? td.discount : tidbd.discount;
}

double GvfSpec::trace_decay() const {
  return kind == LearnerKind::classic_td ? td.trace_decay : tidbd.trace_decay;
}

Horde::Horde(std::vector<GvfSpec> specs, std::shared_ptr<const KanervaCoder> coder,
             std::uint32_t channel_count, CumulantSource cumulant_source)
    : specs_(std::move(specs)),
      coder_(std::move(coder)),
      channel_count_(channel_count),
      cumulant_source_(cumulant_source) {
  if (!coder_) {
    throw ConfigError("horde: coder must not be null");
  }
  if (channel_count_ == 0) {
    throw ConfigError("horde: channel_count must be >= 1");
  }
  if (coder_->dimension() != channel_count_) {
    throw ConfigError("horde: coder dimension " + std::to_string(coder_->dimension()) +
                      " does not match channel_count " + std::to_string(channel_count_));
  }
  if (specs_.empty()) {
    throw ConfigError("horde: at least one GVF spec is required");
  }
  learners_.reserve(specs_.size());
  const std::uint32_t n = coder_->prototype_count();
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    GvfSpec& s = specs_[i];
    if (s.cumulant_channel >= channel_count_) {
      throw ConfigError("horde: gvf " + std::to_string(i) + " cumulant_channel " +
                        std::to_string(s.cumulant_channel) + " out of range for " +
                        std::to_string(channel_count_) + " channels");
    }
    if (s.kind == LearnerKind::classic_td) {
      s.td.feature_count = n;
      learners_.emplace_back(std::in_place_type<TdLearner>, s.td);
    } else {
      s.tidbd.feature_count = n;
      learners_.emplace_back(std::in_place_type<TidbdLearner>, s.tidbd);
    }
  }
}

Horde Horde::build(std::uint32_t channel_count, const GvfSpec& tmpl,
                   std::shared_ptr<const KanervaCoder> coder, CumulantSource cumulant_source,
                   const std::vector<double>& step_size_overrides) {
  if (!step_size_overrides.empty() && step_size_overrides.size() != channel_count) {
    throw ConfigError("horde: step_size_overrides has " +
                      std::to_string(step_size_overrides.size()) + " entries, expected " +
                      std::to_string(channel_count));
  }
  std::vector<GvfSpec> specs(channel_count, tmpl);
  for (std::uint32_t c = 0; c < channel_count; ++c) {
    specs[c].cumulant_channel = c;
    if (!step_size_overrides.empty()) {
      specs[c].td.step_size = step_size_overrides[c];
      specs[c].tidbd.initial_step_size = step_size_overrides[c];
    }
  }
  return Horde(std::move(specs), std::move(coder), channel_count, cumulant_source);
}

std::vector<double> Horde::cumulants_from(std::span<const double> frame_next) const {
  if (frame_next.size() != channel_count_) {
    throw DataError("horde: frame has " + std::to_string(frame_next.size()) +
                    " channels, expected " + std::to_string(channel_count_));
  }
  std::vector<double> c(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    c[i] = frame_next[specs_[i].cumulant_channel];
  }
  return c;
}

HordeStepResult Horde::step(std::span<const double> frame_t, std::span<const double> frame_next,
                            std::span<const double> raw_next, unsigned threads) {
  std::vector<double> cumulants;
  if (cumulant_source_ == CumulantSource::raw) {
    if (raw_next.empty()) {
      throw DataError("horde: raw cumulant source configured but no raw frame supplied");
    }
    cumulants = cumulants_from(raw_next);
  } else {
    cumulants = cumulants_from(frame_next);
  }
  const FeatureVector x_t = coder_->encode(frame_t);
  const FeatureVector x_next = coder_->encode(frame_next);
  return step_features(x_t, x_next, cumulants, threads);
}

HordeStepResult Horde::step_features(const FeatureVector& x_t, const FeatureVector& x_next,
                                     std::span<const double> cumulants, unsigned threads) {
  if (cumulants.size() != specs_.size()) {
    throw DataError("horde: got " + std::to_string(cumulants.size()) + " cumulants for " +
                    std::to_string(specs_.size()) + " GVFs");
  }
  HordeStepResult out;
  out.value.resize(specs_.size());
  out.delta.resize(specs_.size());
  out.normalizer.resize(specs_.size());

  const std::size_t count = specs_.size();
  if (threads <= 1 || count < 2) {
    update_range(0, count, x_t, x_next, cumulants, out);
  } else {
    const unsigned workers = threads > count ? static_cast<unsigned>(count) : threads;
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned wkr = 0; wkr < workers; ++wkr) {
      const std::size_t first = count * wkr / workers;
      const std::size_t last = count * (wkr + 1) / workers;
      pool.emplace_back([&, wkr, first, last] {
        try {
          update_range(first, last, x_t, x_next, cumulants, out);
        } catch (...) {
          errors[wkr] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  ++steps_taken_;
  return out;
}

void Horde::update_range(std::size_t first, std::size_t last, const FeatureVector& x_t,
                         const FeatureVector& x_next, std::span<const double> cumulants,
                         HordeStepResult& out) {
  for (std::size_t i = first; i < last; ++i) {
    try {
      if (auto* td = std::get_if<TdLearner>(&learners_[i])) {
        out.value[i] = td->predict(x_t);
        out.delta[i] = td->update(x_t, x_next, cumulants[i]);
        out.normalizer[i] = 1.0;
      } else {
        auto& tidbd = std::get<TidbdLearner>(learners_[i]);
        out.value[i] = tidbd.predict(x_t);
        const TidbdStepInfo info = tidbd.update(x_t, x_next, cumulants[i]);
        out.delta[i] = info.delta;
        out.normalizer[i] = info.normalizer;
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError("gvf " + std::to_string(i) + ": " + e.what(),
                            static_cast<std::int64_t>(i), steps_taken_);
    }
  }
}

std::vector<double> Horde::predictions(const FeatureVector& x) const {
  std::vector<double> v(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (const auto* td = std::get_if<TdLearner>(&learners_[i])) {
      v[i] = td->predict(x);
    } else {
      v[i] = std::get<TidbdLearner>(learners_[i]).predict(x);
    }
  }
  return v;
}

const TdLearner* Horde::td(std::size_t gvf) const {
  return std::get_if<TdLearner>(&learners_.at(gvf));
}

const TidbdLearner* Horde::tidbd(std::size_t gvf) const {
  return std::get_if<TidbdLearner>(&learners_.at(gvf));
}

StepSizeSnapshot Horde::snapshot(std::size_t gvf) const {
  if (const auto* learner = std::get_if<TidbdLearner>(&learners_.at(gvf))) {
    return learner->snapshot();
  }
  const TdLearner& td = std::get<TdLearner>(learners_.at(gvf));
  const std::uint32_t n = td.config().feature_count;
  StepSizeSnapshot snap;
  snap.feature_index.resize(n);
  snap.alpha.assign(n, td.config().step_size);
  snap.touched.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    snap.feature_index[i] = i;
    snap.touched[i] = (td.weights()[i] != 0.0 || td.trace()[i] != 0.0) ? 1 : 0;
  }
  return snap;
}

std::size_t Horde::state_bytes() const {
  std::size_t total = 0;
  for (const auto& learner : learners_) {
    if (const auto* td = std::get_if<TdLearner>(&learner)) {
      total += td->state_bytes();
    } else {
      total += std::get<TidbdLearner>(learner).state_bytes();
    }
  }
  return total;
}

std::size_t Horde::extra_state_bytes() const {
  std::size_t total = 0;
  for (const auto& learner : learners_) {
    if (const auto* tidbd = std::get_if<TidbdLearner>(&learner)) {
      total += tidbd->extra_state_bytes();
    }
  }
  return total;
}

}  // namespace tdhorde
