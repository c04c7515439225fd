#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdhorde/horde.hpp"
#include "tdhorde/stream.hpp"

namespace tdhorde {

/// Number of trailing steps whose returns are truncation-biased:
/// ceil(ln 0.01 / ln gamma), the point where the missing tail is under 1% of
/// a unit-scale return (44 at gamma = 0.9). Defined as 1 at gamma = 0.
std::int64_t return_horizon_cut(double discount);

struct ReturnSeries {
  std::vector<std::vector<double>> values;  // [gvf][frame index t], full stream length
  std::int64_t horizon_cut = 0;

  std::int64_t frame_count() const {
    return values.empty() ? 0 : static_cast<std::int64_t>(values[0].size());
  }
  /// Steps usable for error measurement: T - horizon_cut (never negative).
  std::int64_t usable_steps() const {
    const std::int64_t usable = frame_count() - horizon_cut;
    return usable > 0 ? usable : 0;
  }
};

/// G_t = sum_k gamma^k C_{t+k+1} via the backward recursion
/// G_t = C_{t+1} + gamma*G_{t+1} with G_{T-1} = 0. cumulants[i] is GVF i's
/// per-frame cumulant series; all series must share one length T >= 1.
ReturnSeries compute_returns(const std::vector<std::vector<double>>& cumulants, double discount);

/// Per-GVF cumulant series [gvf][frame] read from the stream the same way
/// horde steps do (normalized or raw channel values per the horde's source).
std::vector<std::vector<double>> cumulant_series(const Horde& horde,
                                                 const std::vector<StreamFrame>& frames,
                                                 const std::vector<ChannelMeta>& meta);

/// Normalized RMSE across predictors for one step:
/// sqrt((1/N') * sum_included ((G_i - V_i)/|G_i|)^2) over included
/// = {i : |G_i| >= 1e-8}. Returns nullopt when every predictor is excluded
/// (missing, not zero).
std::optional<double> rmse_step(std::span<const double> returns, std::span<const double> values);

struct RmseSeries {
  std::vector<double> value;         // meaningful only where present != 0
  std::vector<std::uint8_t> present;

  double accumulated() const;        // plain sum over present entries
  std::int64_t present_count() const;
};

struct PeriodStats {
  std::vector<double> mean;                  // NaN for periods with no samples
  std::vector<std::vector<double>> samples;  // full per-period sample lists
};

/// Means and sample lists per schedule phase. The series may be shorter than
/// the schedule (the truncation window); it must not be longer.
PeriodStats aggregate_periods(const RmseSeries& series, const Schedule& schedule);

struct TimingReport {
  double encode_seconds_per_frame = 0.0;
  double update_seconds_per_step = 0.0;
  std::int64_t steps = 0;

  double seconds_per_step() const { return encode_seconds_per_frame + update_seconds_per_step; }
};

struct TrialOptions {
  // Steps (measured in completed updates, so 0 = before learning and
  // step_count = end of run) at which snapshot_sink is invoked.
  std::vector<std::int64_t> snapshot_steps;
  std::function<void(std::int64_t step, const Horde& horde)> snapshot_sink;
  unsigned threads = 1;
  bool record_values = false;  // keep per-step predictions (tests only; O(T*gvfs))
};

struct TrialResult {
  RmseSeries rmse;
  PeriodStats periods;
  TimingReport timing;
  double accumulated_rmse = 0.0;
  Horde horde;  // final learner state
  std::vector<std::vector<double>> values;  // [step][gvf] when record_values
};

/// One single-pass online run over pre-encoded features.
/// features[t] = encoding of frame t; cumulants as in cumulant_series;
/// returns from compute_returns on those cumulants.
TrialResult run_trial_features(Horde horde, const std::vector<FeatureVector>& features,
                               const std::vector<std::vector<double>>& cumulants,
                               const ReturnSeries& returns, const Schedule& schedule,
                               const TrialOptions& options = {});

/// Convenience wrapper: normalizes and encodes the stream with the horde's
/// coder, computes cumulants and returns, then runs the trial.
TrialResult run_trial(Horde horde, const std::vector<StreamFrame>& frames,
                      const std::vector<ChannelMeta>& meta, const Schedule& schedule,
                      const TrialOptions& options = {});

/// Encode every frame once (shared across sweep cells with equal coder).
std::vector<FeatureVector> encode_stream(const KanervaCoder& coder,
                                         const std::vector<StreamFrame>& frames,
                                         const std::vector<ChannelMeta>& meta);

struct SweepPlan {
  LearnerKind method = LearnerKind::classic_td;
  std::vector<std::uint32_t> prototype_grid;  // n axis
  std::vector<double> ratio_grid;             // eta axis
  // alpha (TD) or alpha0 (TIDBD) = multiplier / (n * eta).
  std::vector<double> step_multiplier_grid;
  std::vector<double> theta_grid;  // TIDBD only; must be {0.01}-like singleton for TD plans
  std::vector<std::uint64_t> seeds;
  double discount = 0.9;
  double trace_decay = 0.9;
  double decay_time = 1e4;
  bool xi_consistent_form = false;
  CumulantSource cumulant_source = CumulantSource::normalized;

  void validate() const;  // throws ConfigError
};

struct SweepCell {
  std::uint32_t prototypes = 0;
  double ratio = 0.0;
  double multiplier = 0.0;
  double theta = 0.0;  // 0 for classic TD

  double alpha0(double n_times_eta) const { return multiplier / n_times_eta; }
};

/// Full-factorial cell list, in (n, eta, multiplier, theta) nested order.
std::vector<SweepCell> enumerate_cells(const SweepPlan& plan);

struct SweepRow {
  std::string method;
  std::uint32_t prototypes = 0;
  double ratio = 0.0;
  double alpha0 = 0.0;
  double theta = 0.0;
  std::uint64_t seed = 0;
  bool diverged = false;
  double accumulated_rmse = 0.0;          // meaningful when !diverged
  std::vector<double> period_means;       // NaN for empty periods
};

/// Resume/identity key: one row per (cell, seed).
std::string sweep_row_key(const SweepRow& row);

struct SweepOptions {
  std::filesystem::path results_path;  // append rows here when non-empty
  bool resume = true;                  // skip rows already present in results_path
  unsigned threads = 1;
  std::function<void(const SweepRow&)> on_row;
};

/// Runs every (cell, seed) pair of the plan on streams synthesized from the
/// profile (per-seed stream; prototypes, encodings, and returns are cached
/// and shared across cells that agree on them). Divergent cells are recorded
/// with the diverged flag, never as numbers.
std::vector<SweepRow> run_sweep(const SweepPlan& plan, const SynthProfile& profile,
                                const SweepOptions& options = {});

std::vector<SweepRow> load_sweep_csv(const std::filesystem::path& path);

/// Paper-scale full-factorial plans over prototype count and active ratio.
SweepPlan table_plan_td();     // 4 x 6 x 11 = 264 cells
SweepPlan table_plan_tidbd();  // 4 x 6 (alpha0 = 1/(n*eta), theta = 0.01) = 24 cells

/// Meta-step-size values used by the sensitivity study.
std::vector<double> sensitivity_theta_grid();  // {0.005, ..., 0.16}
/// The 11 step-size multipliers of the full-factorial table.
std::vector<double> table_step_multipliers();  // {0.001, ..., 1.024}

struct SensitivityCurve {
  std::string method;
  double theta = 0.0;
  std::uint32_t prototypes = 0;
  double ratio = 0.0;
  std::vector<double> alpha0;            // ascending
  std::vector<double> accumulated_rmse;  // +inf where any seed diverged
  double spread = 0.0;                   // max/min over the alpha axis; +inf on divergence
};

/// Accumulated-RMSE-vs-alpha0 curves grouped by (method, theta, n, eta),
/// averaging over seeds; a cell with any diverged seed counts as +inf.
std::vector<SensitivityCurve> stepsize_sensitivity(const std::vector<SweepRow>& rows);

}  // namespace tdhorde
