#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "tdhorde/kanerva.hpp"
#include "tdhorde/td.hpp"
#include "tdhorde/tidbd.hpp"

namespace tdhorde {

enum class LearnerKind { classic_td, tidbd };

/// Where each GVF's cumulant is read from on a step: the normalized frame
/// (default; keeps returns bounded and plays well with the scale-normalized
/// error metric) or the raw sensor reading.
enum class CumulantSource { normalized, raw };

struct GvfSpec {
  std::uint32_t cumulant_channel = 0;
  LearnerKind kind = LearnerKind::tidbd;
  TdConfig td;        // used when kind == classic_td
  TidbdConfig tidbd;  // used when kind == tidbd

  double discount() const;
  double trace_decay() const;
};

struct HordeStepResult {
  std::vector<double> value;       // V_t per GVF, from pre-update weights
  std::vector<double> delta;       // TD error per GVF
  std::vector<double> normalizer;  // TIDBD overshoot M per GVF; 1.0 for classic TD
};

/// A collection of GVF learners sharing one feature representation. Each step
/// encodes the two frames exactly once and updates every learner from the
/// shared feature vectors; learners hold no shared mutable state, so updates
/// can run sequentially or split across threads with identical results.
class Horde {
 public:
  Horde(std::vector<GvfSpec> specs, std::shared_ptr<const KanervaCoder> coder,
        std::uint32_t channel_count, CumulantSource cumulant_source);

  /// One GVF per channel, cumulant_channel = channel index, all copied from
  /// the template spec. step_size_overrides (optional) gives each channel's
  /// GVF its own alpha (TD) or alpha0 (TIDBD); it must be empty or hold
  /// exactly channel_count entries.
  static Horde build(std::uint32_t channel_count, const GvfSpec& tmpl,
                     std::shared_ptr<const KanervaCoder> coder, CumulantSource cumulant_source,
                     const std::vector<double>& step_size_overrides = {});

  /// Encodes both frames once, reads each GVF's cumulant from frame_next
  /// (normalized values, or raw_next when configured for raw cumulants), and
  /// updates every learner. Frames are normalized d-vectors in [0, 1).
  HordeStepResult step(std::span<const double> frame_t, std::span<const double> frame_next,
                       std::span<const double> raw_next = {}, unsigned threads = 1);

  /// Core update from pre-encoded features; cumulants has one entry per GVF.
  /// Callers that stream frames can encode each frame once and reuse it as
  /// x_next then x_t of consecutive steps.
  HordeStepResult step_features(const FeatureVector& x_t, const FeatureVector& x_next,
                                std::span<const double> cumulants, unsigned threads = 1);

  /// Per-GVF cumulant vector read from a frame (normalized or raw, matching
  /// the configured source).
  std::vector<double> cumulants_from(std::span<const double> frame_next) const;

  std::vector<double> predictions(const FeatureVector& x) const;

  std::size_t gvf_count() const { return specs_.size(); }
  std::uint32_t channel_count() const { return channel_count_; }
  CumulantSource cumulant_source() const { return cumulant_source_; }
  const GvfSpec& spec(std::size_t gvf) const { return specs_.at(gvf); }
  const KanervaCoder& coder() const { return *coder_; }
  std::int64_t steps_taken() const { return steps_taken_; }

  /// Learner access for inspection; nullptr when the GVF is the other kind.
  const TdLearner* td(std::size_t gvf) const;
  const TidbdLearner* tidbd(std::size_t gvf) const;

  /// Step-size snapshot for any GVF. Classic TD reports its constant alpha
  /// with touched = (weight or trace nonzero).
  StepSizeSnapshot snapshot(std::size_t gvf) const;

  std::size_t state_bytes() const;
  std::size_t extra_state_bytes() const;

 private:
  void update_range(std::size_t first, std::size_t last, const FeatureVector& x_t,
                    const FeatureVector& x_next, std::span<const double> cumulants,
                    HordeStepResult& out);

  std::vector<GvfSpec> specs_;
  std::vector<std::variant<TdLearner, TidbdLearner>> learners_;
  std::shared_ptr<const KanervaCoder> coder_;
  std::uint32_t channel_count_ = 0;
  CumulantSource cumulant_source_ = CumulantSource::normalized;
  std::int64_t steps_taken_ = 0;
};

}  // namespace tdhorde
