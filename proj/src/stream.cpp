#include "tdhorde/stream.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "tdhorde/errors.hpp"
#include "tdhorde/rng.hpp"

namespace tdhorde {

namespace {

void split_csv_line(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& cell, const std::filesystem::path& path,
                    std::size_t line_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell +
                    "'");
  }
  return v;
}

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  return line;
}

class FileWriter {
 public:
  explicit FileWriter(const std::filesystem::path& path)
      : path_(path), f_(std::fopen(path.string().c_str(), "wb")) {
    if (!f_) throw DataError("cannot open for writing: " + path.string());
  }
  ~FileWriter() {
    if (f_) std::fclose(f_);
  }
  FileWriter(const FileWriter&) = delete;
  FileWriter& operator=(const FileWriter&) = delete;

  std::FILE* get() { return f_; }
  void close() {
    if (std::fclose(f_) != 0) {
      f_ = nullptr;
      throw DataError("write failed: " + path_.string());
    }
    f_ = nullptr;
  }

 private:
  std::filesystem::path path_;
  std::FILE* f_;
};

}  // namespace

const char* group_name(ChannelGroup group) {
  switch (group) {
    case ChannelGroup::position: return "position";
    case ChannelGroup::velocity: return "velocity";
    case ChannelGroup::load: return "load";
    case ChannelGroup::temperature: return "temperature";
    case ChannelGroup::accel: return "accel";
    case ChannelGroup::pressure: return "pressure";
    case ChannelGroup::other: return "other";
  }
  return "other";
}

ChannelGroup parse_group(const std::string& name) {
  if (name == "position") return ChannelGroup::position;
  if (name == "velocity") return ChannelGroup::velocity;
  if (name == "load") return ChannelGroup::load;
  if (name == "temperature") return ChannelGroup::temperature;
  if (name == "accel") return ChannelGroup::accel;
  if (name == "pressure") return ChannelGroup::pressure;
  if (name == "other") return ChannelGroup::other;
  throw DataError("unknown channel group: '" + name + "'");
}

void validate_meta(const std::vector<ChannelMeta>& meta) {
  if (meta.empty()) {
    throw DataError("channel meta is empty");
  }
  std::set<std::string> names;
  for (std::size_t c = 0; c < meta.size(); ++c) {
    if (meta[c].name.empty()) {
      throw DataError("channel " + std::to_string(c) + " has an empty name");
    }
    if (meta[c].name.find(',') != std::string::npos) {
      throw DataError("channel name contains a comma: '" + meta[c].name + "'");
    }
    if (!(meta[c].min < meta[c].max)) {
      throw DataError("channel '" + meta[c].name + "' needs min < max, got [" +
                      std::to_string(meta[c].min) + ", " + std::to_string(meta[c].max) + "]");
    }
    if (!names.insert(meta[c].name).second) {
      throw DataError("duplicate channel name: '" + meta[c].name + "'");
    }
  }
}

std::vector<std::int64_t> phase_boundaries(const Schedule& schedule) {
  std::vector<std::int64_t> bounds;
  bounds.reserve(schedule.size() + 1);
  std::int64_t t = 0;
  bounds.push_back(0);
  for (const Phase& p : schedule) {
    t += p.steps;
    bounds.push_back(t);
  }
  return bounds;
}

FailureSpec FailureSpec::stuck(std::vector<std::uint32_t> channels, std::uint64_t seed) {
  return FailureSpec{FailureKind::stuck, std::move(channels), 1.0, 0.5, seed};
}

FailureSpec FailureSpec::broken(std::vector<std::uint32_t> channels, std::uint64_t seed) {
  return FailureSpec{FailureKind::broken, std::move(channels), 0.0, 10.0, seed};
}

void FailureSpec::validate(std::uint32_t channel_count) const {
  if (channels.empty()) {
    throw ConfigError("failure: channel set must not be empty");
  }
  std::set<std::uint32_t> seen;
  for (std::uint32_t c : channels) {
    if (c >= channel_count) {
      throw ConfigError("failure: channel " + std::to_string(c) + " out of range for " +
                        std::to_string(channel_count) + " channels");
    }
    if (!seen.insert(c).second) {
      throw ConfigError("failure: duplicate channel " + std::to_string(c));
    }
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std) || !std::isfinite(noise_mean)) {
    throw ConfigError("failure: noise parameters must be finite with std >= 0");
  }
}

void SynthProfile::validate() const {
  validate_meta(channels);
  if (schedule.empty()) {
    throw ConfigError("synth: schedule must not be empty");
  }
  for (std::size_t p = 0; p < schedule.size(); ++p) {
    if (schedule[p].steps == 0) {
      throw ConfigError("synth: phase " + std::to_string(p) + " has zero steps");
    }
  }
  if (!(step_period_s > 0.0) || !(pattern_period_s > 0.0)) {
    throw ConfigError("synth: step and pattern periods must be > 0");
  }
  if (!(rest_noise_fraction >= 0.0) || !(movement_noise_fraction >= 0.0) ||
      !(temperature_rise_fraction >= 0.0) || !(drift_fraction >= 0.0)) {
    throw ConfigError("synth: noise/ramp/drift fractions must be >= 0");
  }
  if (drift_channel >= 0) {
    if (static_cast<std::size_t>(drift_channel) >= channels.size()) {
      throw ConfigError("synth: drift_channel out of range");
    }
    if (drift_phase >= schedule.size()) {
      throw ConfigError("synth: drift_phase out of range");
    }
  }
}

std::vector<ChannelMeta> default_channel_meta() {
  std::vector<ChannelMeta> meta;
  meta.reserve(108);
  auto add = [&meta](const char* prefix, int count, double lo, double hi, ChannelGroup g) {
    for (int j = 0; j < count; ++j) {
      meta.push_back(ChannelMeta{std::string(prefix) + std::to_string(j), lo, hi, g});
    }
  };
  add("pos_j", 17, -2.0, 2.0, ChannelGroup::position);
  add("vel_j", 17, -5.0, 5.0, ChannelGroup::velocity);
  add("load_j", 17, -10.0, 10.0, ChannelGroup::load);
  add("temp_j", 17, 20.0, 80.0, ChannelGroup::temperature);
  add("accel_", 15, -20.0, 20.0, ChannelGroup::accel);
  add("pressure_", 25, 0.0, 5.0, ChannelGroup::pressure);
  return meta;
}

std::vector<std::uint32_t> default_elbow_channels() {
  // Joint 1's position, velocity, load, and temperature channels.
  return {1, 18, 35, 52};
}

std::uint32_t default_drift_channel() {
  return 39;  // load_j5
}

SynthProfile default_synth_profile() {
  SynthProfile p;
  p.channels = default_channel_meta();
  // Six alternating 5-minute phases at 0.265 s per step.
  const std::uint32_t steps = static_cast<std::uint32_t>(std::llround(300.0 / 0.265));
  p.schedule = {Phase{PhaseKind::rest, steps},     Phase{PhaseKind::movement, steps},
                Phase{PhaseKind::rest, steps},     Phase{PhaseKind::movement, steps},
                Phase{PhaseKind::rest, steps},     Phase{PhaseKind::movement, steps}};
  p.drift_channel = static_cast<std::int32_t>(default_drift_channel());
  p.drift_phase = 4;  // the third rest phase
  return p;
}

std::vector<StreamFrame> synthesize(const SynthProfile& profile, std::uint64_t seed) {
  profile.validate();
  const std::vector<ChannelMeta>& meta = profile.channels;
  const std::size_t d = meta.size();
  const std::vector<std::int64_t> bounds = phase_boundaries(profile.schedule);
  const std::int64_t total = bounds.back();

  std::vector<PhaseKind> phase_of(static_cast<std::size_t>(total));
  for (std::size_t p = 0; p < profile.schedule.size(); ++p) {
    for (std::int64_t t = bounds[p]; t < bounds[p + 1]; ++t) {
      phase_of[static_cast<std::size_t>(t)] = profile.schedule[p].kind;
    }
  }

  std::vector<StreamFrame> frames(static_cast<std::size_t>(total));
  for (std::int64_t t = 0; t < total; ++t) {
    frames[static_cast<std::size_t>(t)].index = t;
    frames[static_cast<std::size_t>(t)].timestamp_s = static_cast<double>(t) * profile.step_period_s;
    frames[static_cast<std::size_t>(t)].values.resize(d);
  }

  // Drift ramp: 0 before the drift phase, linear to 1 across it, held at 1
  // afterwards.
  const std::int64_t drift_start = profile.drift_channel >= 0 ? bounds[profile.drift_phase] : 0;
  const std::int64_t drift_end =
      profile.drift_channel >= 0 ? bounds[profile.drift_phase + 1] : 0;

  for (std::size_t c = 0; c < d; ++c) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    const double range = meta[c].max - meta[c].min;
    const bool is_temp = meta[c].group == ChannelGroup::temperature;

    // Rest level sits in the middle half of the range; temperature channels
    // start low to leave headroom for the monotone ramp.
    const double level_frac =
        is_temp ? 0.1 + 0.2 * rng.uniform01() : 0.25 + 0.5 * rng.uniform01();
    const double level = meta[c].min + level_frac * range;

    // Movement sinusoids: 2-3 components with whole-number cycle counts per
    // pattern period, so the pattern repeats exactly. The amplitude budget
    // keeps well within the channel range (temperature stays gentle so the
    // ramp dominates its trend).
    const int n_sin = 2 + static_cast<int>(rng.below(2));
    const double headroom = std::min(level - meta[c].min, meta[c].max - level);
    const double budget = is_temp ? 0.04 * range : 0.8 * headroom;
    double cycles[3];
    double phase[3];
    double amp[3];
    for (int s = 0; s < n_sin; ++s) {
      cycles[s] = static_cast<double>(1 + rng.below(6));
      phase[s] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      amp[s] = budget / n_sin * (0.5 + 0.5 * rng.uniform01());
    }

    const double noise_std = profile.rest_noise_fraction * range;
    const double move_noise_std = profile.movement_noise_fraction * range;
    const double ramp_total = is_temp ? profile.temperature_rise_fraction * range : 0.0;
    const bool drifts = profile.drift_channel == static_cast<std::int32_t>(c);
    const double drift_offset = drifts ? profile.drift_fraction * range : 0.0;

    for (std::int64_t t = 0; t < total; ++t) {
      const double ts = static_cast<double>(t) * profile.step_period_s;
      double v = level;
      if (phase_of[static_cast<std::size_t>(t)] == PhaseKind::movement) {
        for (int s = 0; s < n_sin; ++s) {
          v += amp[s] *
               std::sin(2.0 * std::numbers::pi * cycles[s] * ts / profile.pattern_period_s +
                        phase[s]);
        }
        // Guarded so a zero setting draws nothing and leaves the random
        // sequence (and therefore every existing stream) untouched.
        if (move_noise_std > 0.0) {
          v += rng.gaussian(0.0, move_noise_std);
        }
      } else if (noise_std > 0.0) {
        v += rng.gaussian(0.0, noise_std);
      }
      if (ramp_total > 0.0 && total > 1) {
        v += ramp_total * (static_cast<double>(t) / static_cast<double>(total - 1));
      }
      if (drifts) {
        double ramp01 = 0.0;
        if (t >= drift_end) {
          ramp01 = 1.0;
        } else if (t >= drift_start) {
          ramp01 = static_cast<double>(t - drift_start + 1) /
                   static_cast<double>(drift_end - drift_start);
        }
        v += drift_offset * ramp01;
      }
      frames[static_cast<std::size_t>(t)].values[c] = v;
    }
  }
  return frames;
}

std::vector<double> normalize(const StreamFrame& frame, const std::vector<ChannelMeta>& meta) {
  if (frame.values.size() != meta.size()) {
    throw DataError("normalize: frame has " + std::to_string(frame.values.size()) +
                    " channels, meta describes " + std::to_string(meta.size()));
  }
  std::vector<double> out(meta.size());
  for (std::size_t c = 0; c < meta.size(); ++c) {
    const double v = (frame.values[c] - meta[c].min) / (meta[c].max - meta[c].min);
    out[c] = std::clamp(v, 0.0, 1.0 - 1e-9);
  }
  return out;
}

std::vector<StreamFrame> inject_failure(const std::vector<StreamFrame>& frames,
                                        const FailureSpec& spec, std::uint32_t channel_count) {
  spec.validate(channel_count);
  std::vector<std::uint32_t> channels = spec.channels;
  std::sort(channels.begin(), channels.end());

  std::vector<StreamFrame> out = frames;
  Rng rng(spec.seed);
  for (StreamFrame& frame : out) {
    if (frame.values.size() != channel_count) {
      throw DataError("inject_failure: frame " + std::to_string(frame.index) + " has " +
                      std::to_string(frame.values.size()) + " channels, expected " +
                      std::to_string(channel_count));
    }
    for (std::uint32_t c : channels) {
      frame.values[c] = rng.gaussian(spec.noise_mean, spec.noise_std);
    }
  }
  return out;
}

std::vector<StreamFrame> load_stream_csv(const std::filesystem::path& path,
                                         const std::vector<ChannelMeta>& meta) {
  validate_meta(meta);
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open stream CSV: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(path.string() + ": empty file, expected a header row");
  }
  std::vector<std::string> cells;
  split_csv_line(chomp(line), cells);
  if (cells.size() != meta.size() + 1) {
    throw DataError(path.string() + ": header has " + std::to_string(cells.size()) +
                    " columns, expected " + std::to_string(meta.size() + 1) + " (timestamp_s + " +
                    std::to_string(meta.size()) + " channels)");
  }
  if (cells[0] != "timestamp_s") {
    throw DataError(path.string() + ": first header column must be 'timestamp_s', got '" +
                    cells[0] + "'");
  }
  for (std::size_t c = 0; c < meta.size(); ++c) {
    if (cells[c + 1] != meta[c].name) {
      throw DataError(path.string() + ": header column " + std::to_string(c + 1) + " is '" +
                      cells[c + 1] + "', meta expects '" + meta[c].name + "'");
    }
  }

  std::vector<StreamFrame> frames;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = chomp(line);
    if (row.empty()) continue;
    split_csv_line(row, cells);
    if (cells.size() != meta.size() + 1) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": row has " +
                      std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(meta.size() + 1));
    }
    StreamFrame frame;
    frame.index = static_cast<std::int64_t>(frames.size());
    frame.timestamp_s = parse_double(cells[0], path, line_no);
    frame.values.resize(meta.size());
    for (std::size_t c = 0; c < meta.size(); ++c) {
      frame.values[c] = parse_double(cells[c + 1], path, line_no);
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

void write_stream_csv(const std::filesystem::path& path, const std::vector<StreamFrame>& frames,
                      const std::vector<ChannelMeta>& meta) {
  validate_meta(meta);
  FileWriter out(path);
  std::fputs("timestamp_s", out.get());
  for (const ChannelMeta& m : meta) {
    std::fprintf(out.get(), ",%s", m.name.c_str());
  }
  std::fputc('\n', out.get());
  for (const StreamFrame& frame : frames) {
    if (frame.values.size() != meta.size()) {
      throw DataError("write_stream_csv: frame " + std::to_string(frame.index) + " has " +
                      std::to_string(frame.values.size()) + " channels, meta describes " +
                      std::to_string(meta.size()));
    }
    std::fprintf(out.get(), "%.17g", frame.timestamp_s);
    for (double v : frame.values) {
      std::fprintf(out.get(), ",%.17g", v);
    }
    std::fputc('\n', out.get());
  }
  out.close();
}

std::vector<ChannelMeta> load_meta_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open channel meta CSV: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || chomp(line) != "name,min,max,group") {
    throw DataError(path.string() + ": expected header 'name,min,max,group'");
  }
  std::vector<ChannelMeta> meta;
  std::vector<std::string> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = chomp(line);
    if (row.empty()) continue;
    split_csv_line(row, cells);
    if (cells.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 4 columns (name,min,max,group)");
    }
    ChannelMeta m;
    m.name = cells[0];
    m.min = parse_double(cells[1], path, line_no);
    m.max = parse_double(cells[2], path, line_no);
    m.group = parse_group(cells[3]);
    meta.push_back(std::move(m));
  }
  validate_meta(meta);
  return meta;
}

void write_meta_csv(const std::filesystem::path& path, const std::vector<ChannelMeta>& meta) {
  validate_meta(meta);
  FileWriter out(path);
  std::fputs("name,min,max,group\n", out.get());
  for (const ChannelMeta& m : meta) {
    std::fprintf(out.get(), "%s,%.17g,%.17g,%s\n", m.name.c_str(), m.min, m.max,
                 group_name(m.group));
  }
  out.close();
}

}  // namespace tdhorde
