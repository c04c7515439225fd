#include "tdhorde/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tdhorde/errors.hpp"

namespace tdhorde {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* context,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(std::string("config: '") + context + "' must be an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string("config: unknown key '") + item.key() + "' in " + context);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const char* context) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "' in " + context + ": " +
                      e.what());
  }
}

LearnerKind parse_learner(const std::string& s, const char* context) {
  if (s == "tidbd") return LearnerKind::tidbd;
  if (s == "classic_td") return LearnerKind::classic_td;
  throw ConfigError(std::string("config: unknown learner '") + s + "' in " + context +
                    " (expected 'tidbd' or 'classic_td')");
}

CumulantSource parse_cumulant_source(const std::string& s) {
  if (s == "normalized") return CumulantSource::normalized;
  if (s == "raw") return CumulantSource::raw;
  throw ConfigError("config: unknown cumulant_source '" + s +
                    "' (expected 'normalized' or 'raw')");
}

PhaseKind parse_phase_kind(const std::string& s) {
  if (s == "rest") return PhaseKind::rest;
  if (s == "movement") return PhaseKind::movement;
  throw ConfigError("config: unknown phase kind '" + s + "' (expected 'rest' or 'movement')");
}

FailureKind parse_failure_kind(const std::string& s) {
  if (s == "stuck") return FailureKind::stuck;
  if (s == "broken") return FailureKind::broken;
  throw ConfigError("config: unknown failure kind '" + s + "' (expected 'stuck' or 'broken')");
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  schedule = default_synth_profile().schedule;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path.string());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + origin + " is not valid JSON: " + e.what());
  }
  check_keys(root, origin.c_str(),
             {"data", "schedule", "coder", "horde", "failure", "run", "sweep"});

  ExperimentConfig cfg;

  if (root.contains("data")) {
    const json& d = root.at("data");
    check_keys(d, "data",
               {"source", "stream_csv", "meta_csv", "seed", "step_period_s", "pattern_period_s",
                "rest_noise_fraction", "movement_noise_fraction", "temperature_rise_fraction", "drift_channel",
                "drift_phase", "drift_fraction"});
    const std::string source = get_or<std::string>(d, "source", "synthetic", "data");
    if (source == "synthetic") {
      cfg.data.source = DataSource::synthetic;
    } else if (source == "csv") {
      cfg.data.source = DataSource::csv;
    } else {
      throw ConfigError("config: unknown data source '" + source +
                        "' (expected 'synthetic' or 'csv')");
    }
    cfg.data.stream_csv = get_or<std::string>(d, "stream_csv", "", "data");
    cfg.data.meta_csv = get_or<std::string>(d, "meta_csv", "", "data");
    cfg.data.seed = get_or<std::uint64_t>(d, "seed", cfg.data.seed, "data");
    cfg.data.step_period_s = get_or<double>(d, "step_period_s", cfg.data.step_period_s, "data");
    cfg.data.pattern_period_s =
        get_or<double>(d, "pattern_period_s", cfg.data.pattern_period_s, "data");
    cfg.data.rest_noise_fraction =
        get_or<double>(d, "rest_noise_fraction", cfg.data.rest_noise_fraction, "data");
    cfg.data.movement_noise_fraction =
        get_or<double>(d, "movement_noise_fraction", cfg.data.movement_noise_fraction, "data");
    cfg.data.temperature_rise_fraction =
        get_or<double>(d, "temperature_rise_fraction", cfg.data.temperature_rise_fraction, "data");
    cfg.data.drift_channel = get_or<std::int32_t>(d, "drift_channel", cfg.data.drift_channel, "data");
    cfg.data.drift_phase = get_or<std::uint32_t>(d, "drift_phase", cfg.data.drift_phase, "data");
    cfg.data.drift_fraction = get_or<double>(d, "drift_fraction", cfg.data.drift_fraction, "data");
  }

  if (root.contains("schedule")) {
    const json& s = root.at("schedule");
    if (!s.is_array() || s.empty()) {
      throw ConfigError("config: 'schedule' must be a non-empty array");
    }
    cfg.schedule.clear();
    for (const json& p : s) {
      check_keys(p, "schedule entry", {"kind", "steps"});
      if (!p.contains("kind") || !p.contains("steps")) {
        throw ConfigError("config: each schedule entry needs 'kind' and 'steps'");
      }
      Phase phase;
      phase.kind = parse_phase_kind(p.at("kind").get<std::string>());
      phase.steps = get_or<std::uint32_t>(p, "steps", 0, "schedule entry");
      cfg.schedule.push_back(phase);
    }
  }

  if (root.contains("coder")) {
    const json& c = root.at("coder");
    check_keys(c, "coder", {"prototypes", "active_ratio", "seed"});
    cfg.coder.prototypes = get_or<std::uint32_t>(c, "prototypes", cfg.coder.prototypes, "coder");
    cfg.coder.active_ratio = get_or<double>(c, "active_ratio", cfg.coder.active_ratio, "coder");
    cfg.coder.seed = get_or<std::uint64_t>(c, "seed", cfg.coder.seed, "coder");
  }

  if (root.contains("horde")) {
    const json& h = root.at("horde");
    check_keys(h, "horde",
               {"learner", "discount", "trace_decay", "step_size", "meta_step_size", "decay_time",
                "xi_consistent_form", "cumulant_source", "step_size_overrides"});
    cfg.horde.learner =
        parse_learner(get_or<std::string>(h, "learner", "tidbd", "horde"), "horde");
    cfg.horde.discount = get_or<double>(h, "discount", cfg.horde.discount, "horde");
    cfg.horde.trace_decay = get_or<double>(h, "trace_decay", cfg.horde.trace_decay, "horde");
    cfg.horde.step_size = get_or<double>(h, "step_size", cfg.horde.step_size, "horde");
    cfg.horde.meta_step_size =
        get_or<double>(h, "meta_step_size", cfg.horde.meta_step_size, "horde");
    cfg.horde.decay_time = get_or<double>(h, "decay_time", cfg.horde.decay_time, "horde");
    cfg.horde.xi_consistent_form =
        get_or<bool>(h, "xi_consistent_form", cfg.horde.xi_consistent_form, "horde");
    cfg.horde.cumulant_source = parse_cumulant_source(
        get_or<std::string>(h, "cumulant_source", "normalized", "horde"));
    cfg.horde.step_size_overrides =
        get_or<std::vector<double>>(h, "step_size_overrides", {}, "horde");
  }

  if (root.contains("failure") && !root.at("failure").is_null()) {
    const json& f = root.at("failure");
    check_keys(f, "failure", {"kind", "channels", "noise_mean", "noise_std", "seed"});
    if (!f.contains("kind")) {
      throw ConfigError("config: failure section needs 'kind'");
    }
    const FailureKind kind = parse_failure_kind(f.at("kind").get<std::string>());
    std::vector<std::uint32_t> channels =
        get_or<std::vector<std::uint32_t>>(f, "channels", default_elbow_channels(), "failure");
    FailureSpec spec = kind == FailureKind::stuck
                           ? FailureSpec::stuck(std::move(channels), 1)
                           : FailureSpec::broken(std::move(channels), 1);
    spec.noise_mean = get_or<double>(f, "noise_mean", spec.noise_mean, "failure");
    spec.noise_std = get_or<double>(f, "noise_std", spec.noise_std, "failure");
    spec.seed = get_or<std::uint64_t>(f, "seed", spec.seed, "failure");
    cfg.failure = spec;
  }

  if (root.contains("run")) {
    const json& r = root.at("run");
    check_keys(r, "run", {"seeds", "trials", "out_dir", "snapshot_steps", "threads"});
    if (r.contains("seeds") && r.contains("trials")) {
      throw ConfigError("config: give either 'seeds' or 'trials' in run, not both");
    }
    if (r.contains("seeds")) {
      cfg.run.seeds = get_or<std::vector<std::uint64_t>>(r, "seeds", {}, "run");
    } else if (r.contains("trials")) {
      const std::uint64_t trials = get_or<std::uint64_t>(r, "trials", 0, "run");
      cfg.run.seeds.clear();
      for (std::uint64_t s = 1; s <= trials; ++s) cfg.run.seeds.push_back(s);
    }
    cfg.run.out_dir = get_or<std::string>(r, "out_dir", "out", "run");
    cfg.run.snapshot_steps =
        get_or<std::vector<std::int64_t>>(r, "snapshot_steps", {}, "run");
    cfg.run.threads = get_or<unsigned>(r, "threads", 1, "run");
  }

  if (root.contains("sweep") && !root.at("sweep").is_null()) {
    const json& s = root.at("sweep");
    check_keys(s, "sweep",
               {"method", "prototype_grid", "ratio_grid", "step_multiplier_grid", "theta_grid",
                "seeds"});
    SweepPlan plan;
    plan.method = parse_learner(get_or<std::string>(s, "method", "classic_td", "sweep"), "sweep");
    plan.prototype_grid = get_or<std::vector<std::uint32_t>>(
        s, "prototype_grid", table_plan_td().prototype_grid, "sweep");
    plan.ratio_grid =
        get_or<std::vector<double>>(s, "ratio_grid", table_plan_td().ratio_grid, "sweep");
    plan.step_multiplier_grid = get_or<std::vector<double>>(
        s, "step_multiplier_grid",
        plan.method == LearnerKind::tidbd ? std::vector<double>{1.0} : table_step_multipliers(),
        "sweep");
    plan.theta_grid = get_or<std::vector<double>>(
        s, "theta_grid",
        plan.method == LearnerKind::tidbd ? std::vector<double>{0.01} : std::vector<double>{},
        "sweep");
    plan.seeds = get_or<std::vector<std::uint64_t>>(s, "seeds", {1}, "sweep");
    plan.discount = cfg.horde.discount;
    plan.trace_decay = cfg.horde.trace_decay;
    plan.decay_time = cfg.horde.decay_time;
    plan.xi_consistent_form = cfg.horde.xi_consistent_form;
    plan.cumulant_source = cfg.horde.cumulant_source;
    cfg.sweep = std::move(plan);
  }

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (data.source == DataSource::csv && data.stream_csv.empty()) {
    throw ConfigError("config: csv data source needs 'stream_csv'");
  }
  if (schedule.empty()) {
    throw ConfigError("config: schedule must not be empty");
  }
  for (const Phase& p : schedule) {
    if (p.steps == 0) throw ConfigError("config: schedule phases need steps >= 1");
  }

  const std::vector<ChannelMeta> meta = channel_meta();
  CoderConfig coder_cfg;
  coder_cfg.dimension = static_cast<std::uint32_t>(meta.size());
  coder_cfg.prototype_count = coder.prototypes;
  coder_cfg.active_ratio = coder.active_ratio;
  coder_cfg.seed = coder.seed;
  coder_cfg.validate();

  const GvfSpec tmpl = horde_template();
  if (tmpl.kind == LearnerKind::classic_td) {
    TdConfig c = tmpl.td;
    c.feature_count = coder.prototypes;
    c.validate();
  } else {
    TidbdConfig c = tmpl.tidbd;
    c.feature_count = coder.prototypes;
    c.validate();
  }
  if (!horde.step_size_overrides.empty() &&
      horde.step_size_overrides.size() != meta.size()) {
    throw ConfigError("config: step_size_overrides has " +
                      std::to_string(horde.step_size_overrides.size()) + " entries for " +
                      std::to_string(meta.size()) + " channels");
  }

  if (failure) {
    failure->validate(static_cast<std::uint32_t>(meta.size()));
  }
  if (run.seeds.empty()) {
    throw ConfigError("config: run needs at least one seed");
  }
  if (run.threads == 0) {
    throw ConfigError("config: run.threads must be >= 1");
  }
  for (std::int64_t s : run.snapshot_steps) {
    if (s < 0) throw ConfigError("config: snapshot steps must be >= 0");
  }
  if (data.source == DataSource::synthetic) {
    synth_profile().validate();
  }
  if (sweep) {
    sweep->validate();
  }
}

std::vector<ChannelMeta> ExperimentConfig::channel_meta() const {
  if (data.meta_csv.empty()) return default_channel_meta();
  return load_meta_csv(data.meta_csv);
}

SynthProfile ExperimentConfig::synth_profile() const {
  SynthProfile p;
  p.channels = channel_meta();
  p.schedule = schedule;
  p.step_period_s = data.step_period_s;
  p.pattern_period_s = data.pattern_period_s;
  p.rest_noise_fraction = data.rest_noise_fraction;
  p.movement_noise_fraction = data.movement_noise_fraction;
  p.temperature_rise_fraction = data.temperature_rise_fraction;
  p.drift_channel = data.drift_channel;
  p.drift_phase = data.drift_phase;
  p.drift_fraction = data.drift_fraction;
  return p;
}

double ExperimentConfig::resolved_step_size() const {
  if (horde.step_size > 0.0) return horde.step_size;
  return 1.0 / (static_cast<double>(coder.prototypes) * coder.active_ratio);
}

GvfSpec ExperimentConfig::horde_template() const {
  GvfSpec tmpl;
  tmpl.kind = horde.learner;
  const double alpha = resolved_step_size();
  tmpl.td = TdConfig{alpha, horde.discount, horde.trace_decay, 0};
  tmpl.tidbd = TidbdConfig{horde.meta_step_size, horde.decay_time,       alpha,
                           horde.discount,       horde.trace_decay,      0,
                           horde.xi_consistent_form};
  return tmpl;
}

std::vector<std::int64_t> ExperimentConfig::snapshot_steps_for(std::int64_t step_count) const {
  std::vector<std::int64_t> steps;
  if (!run.snapshot_steps.empty()) {
    for (std::int64_t s : run.snapshot_steps) {
      if (s <= step_count) steps.push_back(s);
    }
  } else {
    const std::vector<std::int64_t> bounds = phase_boundaries(schedule);
    steps.push_back(0);
    if (bounds.size() > 2) steps.push_back(std::min<std::int64_t>(bounds[2], step_count));
    if (bounds.size() > 4) steps.push_back(std::min<std::int64_t>(bounds[4], step_count));
    steps.push_back(step_count);
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

std::string ExperimentConfig::to_json_text() const {
  json root;
  json d;
  d["source"] = data.source == DataSource::synthetic ? "synthetic" : "csv";
  if (!data.stream_csv.empty()) d["stream_csv"] = data.stream_csv.string();
  if (!data.meta_csv.empty()) d["meta_csv"] = data.meta_csv.string();
  d["seed"] = data.seed;
  d["step_period_s"] = data.step_period_s;
  d["pattern_period_s"] = data.pattern_period_s;
  d["rest_noise_fraction"] = data.rest_noise_fraction;
  d["movement_noise_fraction"] = data.movement_noise_fraction;
  d["temperature_rise_fraction"] = data.temperature_rise_fraction;
  d["drift_channel"] = data.drift_channel;
  d["drift_phase"] = data.drift_phase;
  d["drift_fraction"] = data.drift_fraction;
  root["data"] = std::move(d);

  json sched = json::array();
  for (const Phase& p : schedule) {
    sched.push_back({{"kind", p.kind == PhaseKind::rest ? "rest" : "movement"},
                     {"steps", p.steps}});
  }
  root["schedule"] = std::move(sched);

  root["coder"] = {{"prototypes", coder.prototypes},
                   {"active_ratio", coder.active_ratio},
                   {"seed", coder.seed}};

  json h;
  h["learner"] = horde.learner == LearnerKind::tidbd ? "tidbd" : "classic_td";
  h["discount"] = horde.discount;
  h["trace_decay"] = horde.trace_decay;
  h["step_size"] = resolved_step_size();
  h["meta_step_size"] = horde.meta_step_size;
  h["decay_time"] = horde.decay_time;
  h["xi_consistent_form"] = horde.xi_consistent_form;
  h["cumulant_source"] =
      horde.cumulant_source == CumulantSource::normalized ? "normalized" : "raw";
  if (!horde.step_size_overrides.empty()) h["step_size_overrides"] = horde.step_size_overrides;
  root["horde"] = std::move(h);

  if (failure) {
    root["failure"] = {{"kind", failure->kind == FailureKind::stuck ? "stuck" : "broken"},
                       {"channels", failure->channels},
                       {"noise_mean", failure->noise_mean},
                       {"noise_std", failure->noise_std},
                       {"seed", failure->seed}};
  }

  json r;
  r["seeds"] = run.seeds;
  r["out_dir"] = run.out_dir.string();
  if (!run.snapshot_steps.empty()) r["snapshot_steps"] = run.snapshot_steps;
  r["threads"] = run.threads;
  root["run"] = std::move(r);

  if (sweep) {
    root["sweep"] = {{"method", sweep->method == LearnerKind::tidbd ? "tidbd" : "classic_td"},
                     {"prototype_grid", sweep->prototype_grid},
                     {"ratio_grid", sweep->ratio_grid},
                     {"step_multiplier_grid", sweep->step_multiplier_grid},
                     {"theta_grid", sweep->theta_grid},
                     {"seeds", sweep->seeds}};
  }
  return root.dump(2) + "\n";
}

}  // namespace tdhorde
