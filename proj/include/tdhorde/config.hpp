#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tdhorde/evaluation.hpp"
#include "tdhorde/horde.hpp"
#include "tdhorde/stream.hpp"

namespace tdhorde {

/// Experiment configuration, loaded from a JSON file. Every section and key
/// is optional unless noted; omitted keys take the defaults below (the
/// reference experiment profile). Unknown keys are rejected.
///
/// {
///   "data": {
///     "source": "synthetic" | "csv",      // default synthetic
///     "stream_csv": "path",               // required for csv
///     "meta_csv": "path",                 // optional custom channel meta
///     "seed": 1,                          // synthesis base seed
///     "step_period_s": 0.265,
///     "pattern_period_s": 100.0,
///     "rest_noise_fraction": 1e-3,
///     "movement_noise_fraction": 0.0,
///     "temperature_rise_fraction": 0.3,
///     "drift_channel": 39,                // -1 disables
///     "drift_phase": 4,
///     "drift_fraction": 0.25
///   },
///   "schedule": [ {"kind": "rest", "steps": 1132}, ... ],  // default 6x1132
///   "coder": { "prototypes": 30000, "active_ratio": 0.032, "seed": 1 },
///   "horde": {
///     "learner": "tidbd" | "classic_td",  // default tidbd
///     "discount": 0.9,
///     "trace_decay": 0.9,
///     "step_size": 0.0,                   // 0 -> 1/(prototypes*active_ratio)
///     "meta_step_size": 0.01,
///     "decay_time": 1e4,
///     "xi_consistent_form": false,
///     "cumulant_source": "normalized" | "raw",
///     "step_size_overrides": [ ... ]      // optional, one per channel
///   },
///   "failure": {                          // optional section
///     "kind": "stuck" | "broken",         // required when present
///     "channels": [1, 18, 35, 52],        // default: the elbow channels
///     "noise_mean": ..., "noise_std": ..., // defaults by kind
///     "seed": 1
///   },
///   "run": {
///     "seeds": [1, 2, ...],               // or "trials": N for seeds 1..N
///     "out_dir": "out",
///     "snapshot_steps": [ ... ],          // default: the four report moments
///     "threads": 1
///   },
///   "sweep": {                            // optional section
///     "method": "classic_td" | "tidbd",
///     "prototype_grid": [...], "ratio_grid": [...],
///     "step_multiplier_grid": [...], "theta_grid": [...],
///     "seeds": [...]
///   }
/// }
struct ExperimentConfig {
  enum class DataSource { synthetic, csv };

  struct Data {
    DataSource source = DataSource::synthetic;
    std::filesystem::path stream_csv;
    std::filesystem::path meta_csv;
    std::uint64_t seed = 1;
    double step_period_s = 0.265;
    double pattern_period_s = 100.0;
    double rest_noise_fraction = 1e-3;
    double movement_noise_fraction = 0.0;
    double temperature_rise_fraction = 0.3;
    std::int32_t drift_channel = 39;
    std::uint32_t drift_phase = 4;
    double drift_fraction = 0.25;
  };

  struct Coder {
    std::uint32_t prototypes = 30000;
    double active_ratio = 0.032;
    std::uint64_t seed = 1;
  };

  struct HordeSettings {
    LearnerKind learner = LearnerKind::tidbd;
    double discount = 0.9;
    double trace_decay = 0.9;
    double step_size = 0.0;  // 0 means 1/(prototypes * active_ratio)
    double meta_step_size = 0.01;
    double decay_time = 1e4;
    bool xi_consistent_form = false;
    CumulantSource cumulant_source = CumulantSource::normalized;
    std::vector<double> step_size_overrides;
  };

  struct Run {
    std::vector<std::uint64_t> seeds = {1};
    std::filesystem::path out_dir = "out";
    std::vector<std::int64_t> snapshot_steps;  // empty -> defaults from schedule
    unsigned threads = 1;
  };

  Data data;
  Schedule schedule;  // defaults to six alternating 1132-step phases
  Coder coder;
  HordeSettings horde;
  std::optional<FailureSpec> failure;
  Run run;
  std::optional<SweepPlan> sweep;

  ExperimentConfig();  // reference defaults

  static ExperimentConfig load(const std::filesystem::path& path);     // throws ConfigError
  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::string& origin = "<config>");
  /// Effective config with all defaults resolved; reloadable to reproduce
  /// the run.
  std::string to_json_text() const;

  void validate() const;

  /// The channel meta in effect: meta_csv when given, the default set
  /// otherwise.
  std::vector<ChannelMeta> channel_meta() const;
  /// Synthesis profile assembled from data + schedule + channel meta.
  SynthProfile synth_profile() const;
  /// TD alpha / TIDBD alpha0 with the 1/(n*eta) default applied.
  double resolved_step_size() const;
  /// Horde template spec (feature_count is filled in by the horde).
  GvfSpec horde_template() const;
  /// Snapshot steps in effect for a run of step_count updates: the
  /// configured list, or {0, end of movement 1, end of movement 2, end of
  /// run} clipped to valid range.
  std::vector<std::int64_t> snapshot_steps_for(std::int64_t step_count) const;
};

}  // namespace tdhorde
