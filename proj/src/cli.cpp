#include "tdhorde/cli.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdhorde/config.hpp"
#include "tdhorde/errors.hpp"
#include "tdhorde/evaluation.hpp"
#include "tdhorde/horde.hpp"
#include "tdhorde/kanerva.hpp"
#include "tdhorde/rng.hpp"
#include "tdhorde/stream.hpp"

namespace tdhorde {

namespace {

namespace fs = std::filesystem;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_write(const fs::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  return FilePtr(f);
}

void close_checked(FilePtr& f, const fs::path& path) {
  std::FILE* raw = f.release();
  if (std::fclose(raw) != 0) throw DataError("write failed for " + path.string());
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g17_or_na(double v) { return std::isnan(v) ? "NA" : g17(v); }

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "experiment config JSON")
      ->required();
  cmd->add_option("-o,--out", args.out_dir, "output directory (overrides run.out_dir)");
  cmd->add_option("--seeds", args.seeds, "trial seeds (overrides run.seeds)");
  cmd->add_option("-j,--parallel", args.threads, "worker threads (overrides run.threads)");
}

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::load(args.config_path);
  if (!args.out_dir.empty()) cfg.run.out_dir = args.out_dir;
  if (!args.seeds.empty()) cfg.run.seeds = args.seeds;
  if (args.threads > 0) cfg.run.threads = args.threads;
  cfg.validate();
  return cfg;
}

/// Stream a given trial sees: the csv recording as-is, or the synthetic
/// profile regenerated under a per-trial seed.
std::vector<StreamFrame> trial_stream(const ExperimentConfig& cfg,
                                      const std::vector<ChannelMeta>& meta,
                                      std::uint64_t trial_seed) {
  if (cfg.data.source == ExperimentConfig::DataSource::csv) {
    return load_stream_csv(cfg.data.stream_csv, meta);
  }
  (void)meta;
  return synthesize(cfg.synth_profile(), mix_seed(cfg.data.seed, trial_seed));
}

std::shared_ptr<const KanervaCoder> trial_coder(const ExperimentConfig& cfg,
                                                std::uint32_t channel_count,
                                                std::uint64_t trial_seed) {
  CoderConfig coder_cfg;
  coder_cfg.dimension = channel_count;
  coder_cfg.prototype_count = cfg.coder.prototypes;
  coder_cfg.active_ratio = cfg.coder.active_ratio;
  coder_cfg.seed = mix_seed(cfg.coder.seed, trial_seed);
  return std::make_shared<const KanervaCoder>(coder_cfg);
}

void write_rmse_per_step(const fs::path& path, const RmseSeries& rmse) {
  FilePtr f = open_write(path);
  std::fprintf(f.get(), "step,rmse\n");
  for (std::size_t t = 0; t < rmse.value.size(); ++t) {
    std::fprintf(f.get(), "%zu,%s\n", t,
                 rmse.present[t] ? g17(rmse.value[t]).c_str() : "NA");
  }
  close_checked(f, path);
}

void write_rmse_per_period(const fs::path& path, const PeriodStats& periods,
                           const Schedule& schedule) {
  FilePtr f = open_write(path);
  std::fprintf(f.get(), "period,kind,steps,mean\n");
  for (std::size_t p = 0; p < periods.mean.size(); ++p) {
    std::fprintf(f.get(), "%zu,%s,%zu,%s\n", p,
                 schedule[p].kind == PhaseKind::rest ? "rest" : "movement",
                 periods.samples[p].size(), g17_or_na(periods.mean[p]).c_str());
  }
  close_checked(f, path);
}

void write_timing(const fs::path& path, const TimingReport& timing) {
  FilePtr f = open_write(path);
  std::fprintf(f.get(), "encode_seconds_per_frame,update_seconds_per_step,seconds_per_step,steps\n");
  std::fprintf(f.get(), "%s,%s,%s,%lld\n", g17(timing.encode_seconds_per_frame).c_str(),
               g17(timing.update_seconds_per_step).c_str(),
               g17(timing.seconds_per_step()).c_str(),
               static_cast<long long>(timing.steps));
  close_checked(f, path);
}

/// Per-GVF step-size summary at one moment: enough for the suppression and
/// runaway signatures without dumping every feature of every learner.
void write_snapshot(const fs::path& path, const Horde& horde) {
  FilePtr f = open_write(path);
  std::fprintf(f.get(),
               "gvf,channel,touched_count,alpha_mean_touched,alpha_mean_all,alpha_min,alpha_max\n");
  for (std::size_t gvf = 0; gvf < horde.gvf_count(); ++gvf) {
    const StepSizeSnapshot snap = horde.snapshot(gvf);
    double sum_all = 0.0;
    double sum_touched = 0.0;
    std::int64_t touched = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < snap.alpha.size(); ++i) {
      const double a = snap.alpha[i];
      sum_all += a;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
      if (snap.touched[i]) {
        sum_touched += a;
        ++touched;
      }
    }
    const double n = static_cast<double>(snap.alpha.size());
    const double mean_touched =
        touched > 0 ? sum_touched / static_cast<double>(touched)
                    : std::numeric_limits<double>::quiet_NaN();
    std::fprintf(f.get(), "%zu,%u,%lld,%s,%s,%s,%s\n", gvf, horde.spec(gvf).cumulant_channel,
                 static_cast<long long>(touched), g17_or_na(mean_touched).c_str(),
                 g17(sum_all / n).c_str(), g17(lo).c_str(), g17(hi).c_str());
  }
  close_checked(f, path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.flush();
  if (!f.good()) throw DataError("write failed for " + path.string());
}

int cmd_generate(const CommonArgs& common, const std::vector<std::uint64_t>& seed_override) {
  const ExperimentConfig cfg = load_config(common);
  if (cfg.data.source != ExperimentConfig::DataSource::synthetic) {
    throw ConfigError("generate needs data.source = synthetic");
  }
  const std::vector<ChannelMeta> meta = cfg.channel_meta();
  const std::uint64_t trial_seed =
      seed_override.empty() ? cfg.run.seeds.front() : seed_override.front();
  const std::vector<StreamFrame> frames =
      synthesize(cfg.synth_profile(), mix_seed(cfg.data.seed, trial_seed));
  fs::create_directories(cfg.run.out_dir);
  const fs::path stream_path = cfg.run.out_dir / "stream.csv";
  write_stream_csv(stream_path, frames, meta);
  write_meta_csv(cfg.run.out_dir / "channel_meta.csv", meta);
  std::printf("wrote %zu frames x %zu channels to %s\n", frames.size(), meta.size(),
              stream_path.string().c_str());
  return 0;
}

int cmd_inject(const CommonArgs& common, const std::vector<std::uint64_t>& seed_override) {
  const ExperimentConfig cfg = load_config(common);
  if (!cfg.failure) {
    throw ConfigError("inject needs a 'failure' section in the config");
  }
  const std::vector<ChannelMeta> meta = cfg.channel_meta();
  const std::uint64_t trial_seed =
      seed_override.empty() ? cfg.run.seeds.front() : seed_override.front();
  const std::vector<StreamFrame> frames = trial_stream(cfg, meta, trial_seed);
  FailureSpec spec = *cfg.failure;
  spec.seed = mix_seed(spec.seed, trial_seed);
  const std::vector<StreamFrame> injected =
      inject_failure(frames, spec, static_cast<std::uint32_t>(meta.size()));
  fs::create_directories(cfg.run.out_dir);
  const fs::path stream_path = cfg.run.out_dir / "injected_stream.csv";
  write_stream_csv(stream_path, injected, meta);
  write_meta_csv(cfg.run.out_dir / "channel_meta.csv", meta);
  std::printf("injected %s failure on %zu channels; wrote %zu frames to %s\n",
              spec.kind == FailureKind::stuck ? "stuck" : "broken", spec.channels.size(),
              injected.size(), stream_path.string().c_str());
  return 0;
}

int cmd_run(const CommonArgs& common, const std::vector<std::int64_t>& snapshot_override) {
  ExperimentConfig cfg = load_config(common);
  if (!snapshot_override.empty()) {
    cfg.run.snapshot_steps = snapshot_override;
    cfg.validate();
  }
  const std::vector<ChannelMeta> meta = cfg.channel_meta();
  const auto channels = static_cast<std::uint32_t>(meta.size());
  const fs::path out = cfg.run.out_dir;
  fs::create_directories(out);
  write_text(out / "effective_config.json", cfg.to_json_text());

  std::vector<std::vector<double>> period_means_by_seed;
  double accumulated_sum = 0.0;
  for (std::uint64_t seed : cfg.run.seeds) {
    std::vector<StreamFrame> frames = trial_stream(cfg, meta, seed);
    if (cfg.failure) {
      FailureSpec spec = *cfg.failure;
      spec.seed = mix_seed(spec.seed, seed);
      frames = inject_failure(frames, spec, channels);
    }
    Horde horde = Horde::build(channels, cfg.horde_template(), trial_coder(cfg, channels, seed),
                               cfg.horde.cumulant_source, cfg.horde.step_size_overrides);

    const fs::path seed_dir = out / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    const auto step_count = static_cast<std::int64_t>(frames.size()) - 1;

    TrialOptions options;
    options.threads = cfg.run.threads;
    options.snapshot_steps = cfg.snapshot_steps_for(step_count);
    options.snapshot_sink = [&seed_dir](std::int64_t step, const Horde& h) {
      write_snapshot(seed_dir / ("stepsize_snapshot_" + std::to_string(step) + ".csv"), h);
    };

    const TrialResult result = run_trial(std::move(horde), frames, meta, cfg.schedule, options);
    write_rmse_per_step(seed_dir / "rmse_per_step.csv", result.rmse);
    write_rmse_per_period(seed_dir / "rmse_per_period.csv", result.periods, cfg.schedule);
    write_timing(seed_dir / "timing.csv", result.timing);
    period_means_by_seed.push_back(result.periods.mean);
    accumulated_sum += result.accumulated_rmse;
    std::printf("seed %" PRIu64 ": accumulated_rmse=%s scored_steps=%" PRId64
                " mean_step_seconds=%s\n",
                seed, g17(result.accumulated_rmse).c_str(), result.rmse.present_count(),
                g17(result.timing.seconds_per_step()).c_str());
  }

  {
    const fs::path path = out / "aggregate_rmse_per_period.csv";
    FilePtr f = open_write(path);
    std::fprintf(f.get(), "period,kind,mean_over_seeds");
    for (std::uint64_t seed : cfg.run.seeds) std::fprintf(f.get(), ",seed_%" PRIu64, seed);
    std::fprintf(f.get(), "\n");
    for (std::size_t p = 0; p < cfg.schedule.size(); ++p) {
      double sum = 0.0;
      std::int64_t count = 0;
      for (const std::vector<double>& means : period_means_by_seed) {
        if (p < means.size() && !std::isnan(means[p])) {
          sum += means[p];
          ++count;
        }
      }
      const double mean = count > 0 ? sum / static_cast<double>(count)
                                    : std::numeric_limits<double>::quiet_NaN();
      std::fprintf(f.get(), "%zu,%s,%s", p,
                   cfg.schedule[p].kind == PhaseKind::rest ? "rest" : "movement",
                   g17_or_na(mean).c_str());
      for (const std::vector<double>& means : period_means_by_seed) {
        std::fprintf(f.get(), ",%s",
                     p < means.size() ? g17_or_na(means[p]).c_str() : "NA");
      }
      std::fprintf(f.get(), "\n");
    }
    close_checked(f, path);
  }
  std::printf("mean accumulated_rmse over %zu seed(s): %s\n", cfg.run.seeds.size(),
              g17(accumulated_sum / static_cast<double>(cfg.run.seeds.size())).c_str());
  return 0;
}

int cmd_sweep(const CommonArgs& common) {
  const ExperimentConfig cfg = load_config(common);
  if (!cfg.sweep) {
    throw ConfigError("sweep needs a 'sweep' section in the config");
  }
  if (cfg.data.source != ExperimentConfig::DataSource::synthetic) {
    throw ConfigError("sweep runs on the synthetic profile; set data.source = synthetic");
  }
  fs::create_directories(cfg.run.out_dir);
  SweepOptions options;
  options.results_path = cfg.run.out_dir / "sweep_results.csv";
  options.resume = true;
  options.threads = cfg.run.threads;
  options.on_row = [](const SweepRow& row) {
    std::printf("%s n=%u eta=%s alpha0=%s theta=%s seed=%" PRIu64 " -> %s\n",
                row.method.c_str(), row.prototypes, g17(row.ratio).c_str(),
                g17(row.alpha0).c_str(), g17(row.theta).c_str(), row.seed,
                row.diverged ? "DIVERGED" : g17(row.accumulated_rmse).c_str());
    std::fflush(stdout);
  };
  const std::vector<SweepRow> rows = run_sweep(*cfg.sweep, cfg.synth_profile(), options);
  std::printf("sweep complete: %zu rows in %s\n", rows.size(),
              options.results_path.string().c_str());
  return 0;
}

int cmd_report(const CommonArgs& common) {
  const ExperimentConfig cfg = load_config(common);
  const fs::path results = cfg.run.out_dir / "sweep_results.csv";
  const std::vector<SweepRow> rows = load_sweep_csv(results);
  const std::vector<SensitivityCurve> curves = stepsize_sensitivity(rows);

  const fs::path curves_path = cfg.run.out_dir / "sensitivity_curves.csv";
  {
    FilePtr f = open_write(curves_path);
    std::fprintf(f.get(), "method,theta,prototypes,ratio,alpha0,accumulated_rmse\n");
    for (const SensitivityCurve& c : curves) {
      for (std::size_t i = 0; i < c.alpha0.size(); ++i) {
        std::fprintf(f.get(), "%s,%s,%u,%s,%s,%s\n", c.method.c_str(), g17(c.theta).c_str(),
                     c.prototypes, g17(c.ratio).c_str(), g17(c.alpha0[i]).c_str(),
                     g17(c.accumulated_rmse[i]).c_str());
      }
    }
    close_checked(f, curves_path);
  }
  const fs::path spread_path = cfg.run.out_dir / "sensitivity_spread.csv";
  {
    FilePtr f = open_write(spread_path);
    std::fprintf(f.get(), "method,theta,prototypes,ratio,spread\n");
    for (const SensitivityCurve& c : curves) {
      std::fprintf(f.get(), "%s,%s,%u,%s,%s\n", c.method.c_str(), g17(c.theta).c_str(),
                   c.prototypes, g17(c.ratio).c_str(), g17(c.spread).c_str());
    }
    close_checked(f, spread_path);
  }
  std::printf("wrote %zu sensitivity curves from %zu sweep rows to %s\n", curves.size(),
              rows.size(), cfg.run.out_dir.string().c_str());
  return 0;
}

}  // namespace

int run_main(int argc, const char* const* argv) {
  CLI::App app{"online GVF horde with per-feature adaptive step sizes"};
  app.require_subcommand(1);

  CommonArgs generate_args;
  std::vector<std::uint64_t> generate_seeds;
  CLI::App* generate = app.add_subcommand("generate", "synthesize a sensor stream CSV");
  add_common(generate, generate_args);

  CommonArgs run_args;
  std::vector<std::int64_t> run_snapshots;
  CLI::App* run = app.add_subcommand("run", "online horde pass with per-seed reports");
  add_common(run, run_args);
  run->add_option("--snapshot-steps", run_snapshots,
                  "update counts at which to snapshot step sizes");

  CommonArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "full-factorial parameter sweep");
  add_common(sweep, sweep_args);

  CommonArgs inject_args;
  CLI::App* inject = app.add_subcommand("inject", "write a stream with a sensor failure applied");
  add_common(inject, inject_args);

  CommonArgs report_args;
  CLI::App* report = app.add_subcommand("report", "sensitivity curves from sweep results");
  add_common(report, report_args);

  int rc = 0;
  generate->callback([&] { rc = cmd_generate(generate_args, generate_args.seeds); });
  run->callback([&] { rc = cmd_run(run_args, run_snapshots); });
  sweep->callback([&] { rc = cmd_sweep(sweep_args); });
  inject->callback([&] { rc = cmd_inject(inject_args, inject_args.seeds); });
  report->callback([&] { rc = cmd_report(report_args); });

  try {
    app.parse(argc, argv);
    return rc;
  } catch (const CLI::ParseError& e) {
    const int cli_rc = app.exit(e);
    return cli_rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("tdhorde");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tdhorde
