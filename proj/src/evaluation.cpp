#include "tdhorde/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "tdhorde/errors.hpp"
#include "tdhorde/rng.hpp"

namespace tdhorde {

namespace {

constexpr std::uint64_t kStreamSeedPurpose = 0x73747265616dULL;  // "stream"
constexpr std::uint64_t kCoderSeedPurpose = 0x636f646572ULL;     // "coder"

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::int64_t return_horizon_cut(double discount) {
  if (!(discount >= 0.0) || !(discount < 1.0)) {
    throw ConfigError("returns: discount must lie in [0, 1), got " + std::to_string(discount));
  }
  if (discount == 0.0) return 1;
  const double cut = std::ceil(std::log(0.01) / std::log(discount));
  return cut < 1.0 ? 1 : static_cast<std::int64_t>(cut);
}

ReturnSeries compute_returns(const std::vector<std::vector<double>>& cumulants, double discount) {
  if (cumulants.empty()) {
    throw DataError("returns: no cumulant series given");
  }
  const std::size_t frames = cumulants[0].size();
  if (frames == 0) {
    throw DataError("returns: empty stream");
  }
  ReturnSeries series;
  series.horizon_cut = return_horizon_cut(discount);
  series.values.resize(cumulants.size());
  for (std::size_t i = 0; i < cumulants.size(); ++i) {
    const std::vector<double>& c = cumulants[i];
    if (c.size() != frames) {
      throw DataError("returns: cumulant series " + std::to_string(i) + " has length " +
                      std::to_string(c.size()) + ", expected " + std::to_string(frames));
    }
    std::vector<double>& g = series.values[i];
    g.assign(frames, 0.0);
    for (std::size_t t = frames - 1; t-- > 0;) {
      g[t] = c[t + 1] + discount * g[t + 1];
    }
  }
  return series;
}

std::vector<std::vector<double>> cumulant_series(const Horde& horde,
                                                 const std::vector<StreamFrame>& frames,
                                                 const std::vector<ChannelMeta>& meta) {
  if (meta.size() != horde.channel_count()) {
    throw DataError("cumulant_series: meta describes " + std::to_string(meta.size()) +
                    " channels, horde expects " + std::to_string(horde.channel_count()));
  }
  std::vector<std::vector<double>> out(horde.gvf_count());
  for (auto& series : out) series.resize(frames.size());
  const bool raw = horde.cumulant_source() == CumulantSource::raw;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (raw) {
      if (frames[t].values.size() != meta.size()) {
        throw DataError("cumulant_series: frame " + std::to_string(t) + " has " +
                        std::to_string(frames[t].values.size()) + " channels");
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i][t] = frames[t].values[horde.spec(i).cumulant_channel];
      }
    } else {
      const std::vector<double> norm = normalize(frames[t], meta);
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i][t] = norm[horde.spec(i).cumulant_channel];
      }
    }
  }
  return out;
}

std::optional<double> rmse_step(std::span<const double> returns, std::span<const double> values) {
  if (returns.size() != values.size() || returns.empty()) {
    throw DataError("rmse_step: shape mismatch (" + std::to_string(returns.size()) + " vs " +
                    std::to_string(values.size()) + ")");
  }
  constexpr double kEpsilonG = 1e-8;
  double sum = 0.0;
  std::size_t included = 0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const double g = returns[i];
    if (std::abs(g) < kEpsilonG) continue;
    const double e = (g - values[i]) / std::abs(g);
    sum += e * e;
    ++included;
  }
  if (included == 0) return std::nullopt;
  return std::sqrt(sum / static_cast<double>(included));
}

double RmseSeries::accumulated() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < value.size(); ++t) {
    if (present[t]) sum += value[t];
  }
  return sum;
}

std::int64_t RmseSeries::present_count() const {
  std::int64_t n = 0;
  for (std::uint8_t p : present) n += p ? 1 : 0;
  return n;
}

PeriodStats aggregate_periods(const RmseSeries& series, const Schedule& schedule) {
  if (series.value.size() != series.present.size()) {
    throw DataError("aggregate_periods: malformed series");
  }
  const std::vector<std::int64_t> bounds = phase_boundaries(schedule);
  const std::int64_t len = static_cast<std::int64_t>(series.value.size());
  if (len > bounds.back()) {
    throw DataError("aggregate_periods: series length " + std::to_string(len) +
                    " exceeds schedule total " + std::to_string(bounds.back()));
  }
  PeriodStats stats;
  stats.mean.resize(schedule.size());
  stats.samples.resize(schedule.size());
  for (std::size_t p = 0; p < schedule.size(); ++p) {
    const std::int64_t lo = bounds[p];
    const std::int64_t hi = std::min(bounds[p + 1], len);
    std::vector<double>& bucket = stats.samples[p];
    for (std::int64_t t = lo; t < hi; ++t) {
      if (series.present[static_cast<std::size_t>(t)]) {
        bucket.push_back(series.value[static_cast<std::size_t>(t)]);
      }
    }
    if (bucket.empty()) {
      stats.mean[p] = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sum = 0.0;
      for (double v : bucket) sum += v;
      stats.mean[p] = sum / static_cast<double>(bucket.size());
    }
  }
  return stats;
}

TrialResult run_trial_features(Horde horde, const std::vector<FeatureVector>& features,
                               const std::vector<std::vector<double>>& cumulants,
                               const ReturnSeries& returns, const Schedule& schedule,
                               const TrialOptions& options) {
  const std::int64_t frames = static_cast<std::int64_t>(features.size());
  if (frames < 2) {
    throw DataError("run_trial: need at least 2 frames, got " + std::to_string(frames));
  }
  if (cumulants.size() != horde.gvf_count() || returns.values.size() != horde.gvf_count()) {
    throw DataError("run_trial: cumulant/return series count does not match the horde");
  }
  for (const auto& series : cumulants) {
    if (static_cast<std::int64_t>(series.size()) != frames) {
      throw DataError("run_trial: cumulant series length mismatch");
    }
  }
  if (returns.frame_count() != frames) {
    throw DataError("run_trial: return series covers " + std::to_string(returns.frame_count()) +
                    " frames, stream has " + std::to_string(frames));
  }

  const std::int64_t steps = frames - 1;
  const std::int64_t usable = std::min(returns.usable_steps(), steps);
  const std::size_t gvfs = horde.gvf_count();

  RmseSeries rmse;
  rmse.value.assign(static_cast<std::size_t>(usable), 0.0);
  rmse.present.assign(static_cast<std::size_t>(usable), 0);

  std::vector<std::vector<double>> recorded;
  if (options.record_values) recorded.reserve(static_cast<std::size_t>(steps));

  auto wants_snapshot = [&options](std::int64_t completed) {
    return options.snapshot_sink &&
           std::find(options.snapshot_steps.begin(), options.snapshot_steps.end(), completed) !=
               options.snapshot_steps.end();
  };

  std::vector<double> cums(gvfs);
  std::vector<double> g_col(gvfs);
  double update_seconds = 0.0;
  for (std::int64_t t = 0; t < steps; ++t) {
    if (wants_snapshot(t)) options.snapshot_sink(t, horde);
    for (std::size_t i = 0; i < gvfs; ++i) {
      cums[i] = cumulants[i][static_cast<std::size_t>(t + 1)];
    }
    const double t0 = now_seconds();
    const HordeStepResult step = horde.step_features(features[static_cast<std::size_t>(t)],
                                                     features[static_cast<std::size_t>(t + 1)],
                                                     cums, options.threads);
    update_seconds += now_seconds() - t0;
    if (t < usable) {
      for (std::size_t i = 0; i < gvfs; ++i) {
        g_col[i] = returns.values[i][static_cast<std::size_t>(t)];
      }
      const std::optional<double> r = rmse_step(g_col, step.value);
      if (r) {
        rmse.value[static_cast<std::size_t>(t)] = *r;
        rmse.present[static_cast<std::size_t>(t)] = 1;
      }
    }
    if (options.record_values) recorded.push_back(step.value);
  }
  if (wants_snapshot(steps)) options.snapshot_sink(steps, horde);

  TrialResult result{std::move(rmse),
                     PeriodStats{},
                     TimingReport{0.0, steps > 0 ? update_seconds / static_cast<double>(steps) : 0.0,
                                  steps},
                     0.0,
                     std::move(horde),
                     std::move(recorded)};
  result.periods = aggregate_periods(result.rmse, schedule);
  result.accumulated_rmse = result.rmse.accumulated();
  return result;
}

std::vector<FeatureVector> encode_stream(const KanervaCoder& coder,
                                         const std::vector<StreamFrame>& frames,
                                         const std::vector<ChannelMeta>& meta) {
  std::vector<FeatureVector> features;
  features.reserve(frames.size());
  for (const StreamFrame& frame : frames) {
    features.push_back(coder.encode(normalize(frame, meta)));
  }
  return features;
}

TrialResult run_trial(Horde horde, const std::vector<StreamFrame>& frames,
                      const std::vector<ChannelMeta>& meta, const Schedule& schedule,
                      const TrialOptions& options) {
  if (frames.empty()) {
    throw DataError("run_trial: empty stream");
  }
  const double discount = horde.spec(0).discount();
  for (std::size_t i = 1; i < horde.gvf_count(); ++i) {
    if (horde.spec(i).discount() != discount) {
      throw ConfigError("run_trial: all GVFs must share one discount for the return oracle");
    }
  }
  const std::vector<std::vector<double>> cumulants = cumulant_series(horde, frames, meta);
  const ReturnSeries returns = compute_returns(cumulants, discount);

  const double t0 = now_seconds();
  const std::vector<FeatureVector> features = encode_stream(horde.coder(), frames, meta);
  const double encode_seconds = (now_seconds() - t0) / static_cast<double>(frames.size());

  TrialResult result =
      run_trial_features(std::move(horde), features, cumulants, returns, schedule, options);
  result.timing.encode_seconds_per_frame = encode_seconds;
  return result;
}

void SweepPlan::validate() const {
  if (prototype_grid.empty() || ratio_grid.empty() || step_multiplier_grid.empty()) {
    throw ConfigError("sweep: prototype, ratio, and multiplier grids must be non-empty");
  }
  for (std::uint32_t n : prototype_grid) {
    if (n == 0) throw ConfigError("sweep: prototype counts must be >= 1");
  }
  for (double eta : ratio_grid) {
    if (!(eta > 0.0) || !(eta <= 1.0)) {
      throw ConfigError("sweep: active ratios must lie in (0, 1]");
    }
  }
  for (double m : step_multiplier_grid) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ConfigError("sweep: step multipliers must be finite and > 0");
    }
  }
  if (method == LearnerKind::tidbd) {
    if (theta_grid.empty()) {
      throw ConfigError("sweep: tidbd plans need a non-empty theta grid");
    }
    for (double th : theta_grid) {
      if (!(th >= 0.0) || !std::isfinite(th)) {
        throw ConfigError("sweep: theta values must be finite and >= 0");
      }
    }
  }
  if (!(discount >= 0.0) || !(discount < 1.0)) {
    throw ConfigError("sweep: discount must lie in [0, 1)");
  }
  if (!(trace_decay >= 0.0) || !(trace_decay <= 1.0)) {
    throw ConfigError("sweep: trace_decay must lie in [0, 1]");
  }
  if (!(decay_time > 0.0)) {
    throw ConfigError("sweep: decay_time must be > 0");
  }
}

std::vector<SweepCell> enumerate_cells(const SweepPlan& plan) {
  plan.validate();
  std::vector<SweepCell> cells;
  const bool tidbd = plan.method == LearnerKind::tidbd;
  for (std::uint32_t n : plan.prototype_grid) {
    for (double eta : plan.ratio_grid) {
      for (double mult : plan.step_multiplier_grid) {
        if (tidbd) {
          for (double theta : plan.theta_grid) {
            cells.push_back(SweepCell{n, eta, mult, theta});
          }
        } else {
          cells.push_back(SweepCell{n, eta, mult, 0.0});
        }
      }
    }
  }
  return cells;
}

std::string sweep_row_key(const SweepRow& row) {
  std::ostringstream key;
  key << row.method << '|' << row.prototypes << '|' << format_g17(row.ratio) << '|'
      << format_g17(row.alpha0) << '|' << format_g17(row.theta) << '|' << row.seed;
  return key.str();
}

namespace {

const char* method_name(LearnerKind kind) {
  return kind == LearnerKind::classic_td ? "classic_td" : "tidbd";
}

void write_sweep_row(std::FILE* f, const SweepRow& row) {
  std::fprintf(f, "%s,%u,%.17g,%.17g,%.17g,%" PRIu64 ",", row.method.c_str(), row.prototypes,
               row.ratio, row.alpha0, row.theta, row.seed);
  if (row.diverged) {
    std::fputs("DIVERGED", f);
  } else {
    std::fprintf(f, "%.17g", row.accumulated_rmse);
  }
  for (double m : row.period_means) {
    if (std::isnan(m)) {
      std::fputs(",NA", f);
    } else {
      std::fprintf(f, ",%.17g", m);
    }
  }
  std::fputc('\n', f);
  std::fflush(f);
}

}  // namespace

std::vector<SweepRow> load_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open sweep results: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    return {};
  }
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  std::vector<std::string> cells;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;
    cells.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (cells.size() < 7) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected at least 7 columns");
    }
    SweepRow row;
    row.method = cells[0];
    row.prototypes = static_cast<std::uint32_t>(std::strtoul(cells[1].c_str(), nullptr, 10));
    row.ratio = std::strtod(cells[2].c_str(), nullptr);
    row.alpha0 = std::strtod(cells[3].c_str(), nullptr);
    row.theta = std::strtod(cells[4].c_str(), nullptr);
    row.seed = std::strtoull(cells[5].c_str(), nullptr, 10);
    if (cells[6] == "DIVERGED") {
      row.diverged = true;
    } else {
      row.accumulated_rmse = std::strtod(cells[6].c_str(), nullptr);
    }
    for (std::size_t c = 7; c < cells.size(); ++c) {
      row.period_means.push_back(cells[c] == "NA" ? std::numeric_limits<double>::quiet_NaN()
                                                  : std::strtod(cells[c].c_str(), nullptr));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> run_sweep(const SweepPlan& plan, const SynthProfile& profile,
                                const SweepOptions& options) {
  plan.validate();
  profile.validate();
  if (plan.seeds.empty()) {
    throw ConfigError("sweep: seed list must not be empty");
  }

  std::vector<SweepRow> rows;
  std::set<std::string> done;
  bool write_header = true;
  if (!options.results_path.empty() && options.resume &&
      std::filesystem::exists(options.results_path)) {
    rows = load_sweep_csv(options.results_path);
    for (const SweepRow& r : rows) done.insert(sweep_row_key(r));
    write_header = false;
  }
  std::FILE* out = nullptr;
  if (!options.results_path.empty()) {
    out = std::fopen(options.results_path.string().c_str(), write_header ? "wb" : "ab");
    if (!out) {
      throw DataError("cannot open sweep results for writing: " + options.results_path.string());
    }
    if (write_header) {
      std::fputs("method,n,eta,alpha0,theta,seed,accumulated_rmse", out);
      for (std::size_t p = 0; p < profile.schedule.size(); ++p) {
        std::fprintf(out, ",period_mean_%zu", p);
      }
      std::fputc('\n', out);
    }
  }

  const std::uint32_t d = static_cast<std::uint32_t>(profile.channels.size());
  const bool tidbd = plan.method == LearnerKind::tidbd;
  const std::vector<double> theta_axis = tidbd ? plan.theta_grid : std::vector<double>{0.0};

  try {
    for (std::uint64_t seed : plan.seeds) {
      const std::vector<StreamFrame> frames =
          synthesize(profile, mix_seed(seed, kStreamSeedPurpose));
      // Per-channel cumulant series and returns are shared across every cell
      // of this seed.
      std::vector<std::vector<double>> cumulants(d);
      for (auto& series : cumulants) series.resize(frames.size());
      for (std::size_t t = 0; t < frames.size(); ++t) {
        if (plan.cumulant_source == CumulantSource::raw) {
          for (std::uint32_t c = 0; c < d; ++c) cumulants[c][t] = frames[t].values[c];
        } else {
          const std::vector<double> norm = normalize(frames[t], profile.channels);
          for (std::uint32_t c = 0; c < d; ++c) cumulants[c][t] = norm[c];
        }
      }
      const ReturnSeries returns = compute_returns(cumulants, plan.discount);

      for (std::uint32_t n : plan.prototype_grid) {
        CoderConfig coder_cfg;
        coder_cfg.dimension = d;
        coder_cfg.prototype_count = n;
        coder_cfg.active_ratio = plan.ratio_grid[0];
        coder_cfg.seed = mix_seed(mix_seed(seed, kCoderSeedPurpose), n);
        const KanervaCoder base_coder(coder_cfg);

        for (double eta : plan.ratio_grid) {
          auto coder = std::make_shared<const KanervaCoder>(base_coder.with_active_ratio(eta));
          std::vector<FeatureVector> features;
          bool encoded = false;

          for (double mult : plan.step_multiplier_grid) {
            const double alpha0 = mult / (static_cast<double>(n) * eta);
            for (double theta : theta_axis) {
              SweepRow row;
              row.method = method_name(plan.method);
              row.prototypes = n;
              row.ratio = eta;
              row.alpha0 = alpha0;
              row.theta = theta;
              row.seed = seed;
              if (done.count(sweep_row_key(row)) != 0) continue;

              if (!encoded) {
                features = encode_stream(*coder, frames, profile.channels);
                encoded = true;
              }

              GvfSpec tmpl;
              tmpl.kind = plan.method;
              tmpl.td = TdConfig{alpha0, plan.discount, plan.trace_decay, 0};
              tmpl.tidbd = TidbdConfig{theta,         plan.decay_time, alpha0,
                                       plan.discount, plan.trace_decay, 0,
                                       plan.xi_consistent_form};
              Horde horde = Horde::build(d, tmpl, coder, plan.cumulant_source);
              try {
                TrialOptions trial_opts;
                trial_opts.threads = options.threads;
                TrialResult trial = run_trial_features(std::move(horde), features, cumulants,
                                                       returns, profile.schedule, trial_opts);
                row.diverged = false;
                row.accumulated_rmse = trial.accumulated_rmse;
                row.period_means = trial.periods.mean;
              } catch (const DivergenceError&) {
                row.diverged = true;
                row.period_means.assign(profile.schedule.size(),
                                        std::numeric_limits<double>::quiet_NaN());
              }
              if (out) write_sweep_row(out, row);
              if (options.on_row) options.on_row(row);
              done.insert(sweep_row_key(row));
              rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  } catch (...) {
    if (out) std::fclose(out);
    throw;
  }
  if (out) std::fclose(out);
  return rows;
}

SweepPlan table_plan_td() {
  SweepPlan p;
  p.method = LearnerKind::classic_td;
  p.prototype_grid = {10000, 20000, 30000, 40000};
  p.ratio_grid = {0.001, 0.002, 0.004, 0.008, 0.016, 0.032};
  p.step_multiplier_grid = table_step_multipliers();
  p.seeds = {1};
  return p;
}

SweepPlan table_plan_tidbd() {
  SweepPlan p;
  p.method = LearnerKind::tidbd;
  p.prototype_grid = {10000, 20000, 30000, 40000};
  p.ratio_grid = {0.001, 0.002, 0.004, 0.008, 0.016, 0.032};
  p.step_multiplier_grid = {1.0};
  p.theta_grid = {0.01};
  p.seeds = {1};
  return p;
}

std::vector<double> sensitivity_theta_grid() {
  return {0.005, 0.01, 0.02, 0.04, 0.08, 0.16};
}

std::vector<double> table_step_multipliers() {
  return {0.001, 0.002, 0.004, 0.008, 0.016, 0.032, 0.064, 0.128, 0.256, 0.512, 1.024};
}

std::vector<SensitivityCurve> stepsize_sensitivity(const std::vector<SweepRow>& rows) {
  if (rows.empty()) {
    throw DataError("sensitivity: empty sweep table");
  }
  struct CellAgg {
    double sum = 0.0;
    std::int64_t count = 0;
    bool diverged = false;
  };
  // Group by (method, theta, n, eta), then aggregate seeds per alpha0.
  std::map<std::string, std::map<double, CellAgg>> groups;
  std::map<std::string, SensitivityCurve> heads;
  for (const SweepRow& row : rows) {
    const std::string key = row.method + "|" + format_g17(row.theta) + "|" +
                            std::to_string(row.prototypes) + "|" + format_g17(row.ratio);
    CellAgg& agg = groups[key][row.alpha0];
    if (row.diverged) {
      agg.diverged = true;
    } else {
      agg.sum += row.accumulated_rmse;
      agg.count += 1;
    }
    if (heads.find(key) == heads.end()) {
      SensitivityCurve head;
      head.method = row.method;
      head.theta = row.theta;
      head.prototypes = row.prototypes;
      head.ratio = row.ratio;
      heads.emplace(key, std::move(head));
    }
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<SensitivityCurve> curves;
  curves.reserve(groups.size());
  for (auto& [key, cells] : groups) {
    SensitivityCurve curve = heads.at(key);
    double lo = kInf;
    double hi = 0.0;
    bool any_inf = false;
    for (const auto& [alpha0, agg] : cells) {
      curve.alpha0.push_back(alpha0);
      double v;
      if (agg.diverged || agg.count == 0) {
        v = kInf;
        any_inf = true;
      } else {
        v = agg.sum / static_cast<double>(agg.count);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      curve.accumulated_rmse.push_back(v);
    }
    if (any_inf) {
      curve.spread = kInf;
    } else if (hi == 0.0) {
      curve.spread = 1.0;  // all-zero curve: perfectly flat
    } else if (lo == 0.0) {
      curve.spread = kInf;
    } else {
      curve.spread = hi / lo;
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace tdhorde
