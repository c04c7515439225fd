#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tdhorde/errors.hpp"
#include "tdhorde/stream.hpp"

using namespace tdhorde;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::size_t count_group(const std::vector<ChannelMeta>& meta, ChannelGroup g) {
  std::size_t n = 0;
  for (const ChannelMeta& m : meta) {
    if (m.group == g) ++n;
  }
  return n;
}

SynthProfile small_profile(Schedule schedule) {
  SynthProfile p;
  p.channels = default_channel_meta();
  p.schedule = std::move(schedule);
  p.drift_channel = -1;
  return p;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace

TEST_SUITE("stream") {

TEST_CASE("default channel meta covers the full sensor set") {
  const std::vector<ChannelMeta> meta = default_channel_meta();
  REQUIRE(meta.size() == 108);
  CHECK(count_group(meta, ChannelGroup::position) == 17);
  CHECK(count_group(meta, ChannelGroup::velocity) == 17);
  CHECK(count_group(meta, ChannelGroup::load) == 17);
  CHECK(count_group(meta, ChannelGroup::temperature) == 17);
  CHECK(count_group(meta, ChannelGroup::accel) == 15);
  CHECK(count_group(meta, ChannelGroup::pressure) == 25);

  CHECK(meta[0].name == "pos_j0");
  CHECK(meta[0].min == -2.0);
  CHECK(meta[0].max == 2.0);
  CHECK(meta[17].name == "vel_j0");
  CHECK(meta[34].name == "load_j0");
  CHECK(meta[51].name == "temp_j0");
  CHECK(meta[51].min == 20.0);
  CHECK(meta[51].max == 80.0);
  CHECK(meta[68].name == "accel_0");
  CHECK(meta[83].name == "pressure_0");
  CHECK(meta[83].min == 0.0);
  CHECK(meta[83].max == 5.0);
  CHECK(meta[107].name == "pressure_24");
  CHECK_NOTHROW(validate_meta(meta));

  // One channel per group for the same joint: position, velocity, load,
  // temperature of joint 1.
  const std::vector<std::uint32_t> elbow = default_elbow_channels();
  REQUIRE(elbow == std::vector<std::uint32_t>{1, 18, 35, 52});
  CHECK(meta[1].group == ChannelGroup::position);
  CHECK(meta[18].group == ChannelGroup::velocity);
  CHECK(meta[35].group == ChannelGroup::load);
  CHECK(meta[52].group == ChannelGroup::temperature);

  CHECK(default_drift_channel() == 39);
  CHECK(meta[39].group == ChannelGroup::load);
}

TEST_CASE("default profile runs six five-minute phases") {
  const SynthProfile p = default_synth_profile();
  CHECK(p.step_period_s == 0.265);
  REQUIRE(p.schedule.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(p.schedule[i].steps == 1132);  // round(300 s / 0.265 s)
    CHECK(p.schedule[i].kind == (i % 2 == 0 ? PhaseKind::rest : PhaseKind::movement));
  }
  const std::vector<std::int64_t> bounds = phase_boundaries(p.schedule);
  REQUIRE(bounds.size() == 7);
  CHECK(bounds.front() == 0);
  CHECK(bounds.back() == 6792);
  CHECK(p.drift_channel == 39);
  CHECK(p.drift_phase == 4);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("phase boundaries accumulate step counts") {
  const Schedule s = {Phase{PhaseKind::rest, 10}, Phase{PhaseKind::movement, 5},
                      Phase{PhaseKind::rest, 3}};
  CHECK(phase_boundaries(s) == std::vector<std::int64_t>{0, 10, 15, 18});
  CHECK(phase_boundaries({}) == std::vector<std::int64_t>{0});
}

TEST_CASE("synthesis is deterministic in the seed") {
  const SynthProfile p =
      small_profile({Phase{PhaseKind::rest, 40}, Phase{PhaseKind::movement, 40}});
  const std::vector<StreamFrame> a = synthesize(p, 11);
  const std::vector<StreamFrame> b = synthesize(p, 11);
  REQUIRE(a.size() == 80);
  REQUIRE(b.size() == 80);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].index == b[t].index);
    CHECK(a[t].timestamp_s == b[t].timestamp_s);
    REQUIRE(a[t].values == b[t].values);  // bitwise
  }

  const std::vector<StreamFrame> c = synthesize(p, 12);
  bool any_diff = false;
  for (std::size_t t = 0; t < a.size() && !any_diff; ++t) {
    any_diff = a[t].values != c[t].values;
  }
  CHECK(any_diff);
}

TEST_CASE("frames stay inside channel ranges with timestamps on the step grid") {
  SynthProfile p =
      small_profile({Phase{PhaseKind::movement, 60}, Phase{PhaseKind::rest, 60}});
  p.rest_noise_fraction = 0.0;  // unbounded jitter tails would defeat the range check
  const std::vector<StreamFrame> frames = synthesize(p, 21);
  REQUIRE(frames.size() == 120);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    CHECK(frames[t].index == static_cast<std::int64_t>(t));
    CHECK(frames[t].timestamp_s == static_cast<double>(t) * p.step_period_s);
    REQUIRE(frames[t].values.size() == p.channels.size());
    for (std::size_t c = 0; c < p.channels.size(); ++c) {
      CHECK(frames[t].values[c] >= p.channels[c].min);
      CHECK(frames[t].values[c] <= p.channels[c].max);
    }
  }
}

TEST_CASE("rest phases are flat when rest noise is disabled") {
  SynthProfile p = small_profile({Phase{PhaseKind::rest, 30}, Phase{PhaseKind::movement, 30},
                                  Phase{PhaseKind::rest, 30}});
  p.rest_noise_fraction = 0.0;
  p.temperature_rise_fraction = 0.0;  // otherwise temperature ramps even at rest
  const std::vector<StreamFrame> frames = synthesize(p, 31);

  for (std::size_t c = 0; c < p.channels.size(); ++c) {
    const double level = frames[0].values[c];
    // Both rest phases sit exactly on the channel's level.
    for (std::size_t t = 0; t < 30; ++t) {
      REQUIRE(frames[t].values[c] == level);
      REQUIRE(frames[60 + t].values[c] == level);
    }
    // Movement actually moves.
    double max_dev = 0.0;
    for (std::size_t t = 30; t < 60; ++t) {
      max_dev = std::max(max_dev, std::abs(frames[t].values[c] - level));
    }
    CHECK(max_dev > 1e-6);
  }
}

TEST_CASE("temperature ramps monotonically across the run") {
  SynthProfile p = small_profile({Phase{PhaseKind::rest, 50}, Phase{PhaseKind::movement, 50},
                                  Phase{PhaseKind::rest, 50}});
  p.rest_noise_fraction = 0.0;
  REQUIRE(p.temperature_rise_fraction == 0.3);
  const std::vector<StreamFrame> frames = synthesize(p, 41);

  const std::vector<ChannelMeta> meta = p.channels;
  for (std::size_t c = 0; c < meta.size(); ++c) {
    if (meta[c].group != ChannelGroup::temperature) {
      // Non-temperature channels return to the same level in every rest phase.
      CHECK(frames[0].values[c] == frames[149].values[c]);
      continue;
    }
    // Strictly increasing through the jitter-free rest phases.
    for (std::size_t t = 1; t < 50; ++t) {
      REQUIRE(frames[t].values[c] > frames[t - 1].values[c]);
      REQUIRE(frames[100 + t].values[c] > frames[99 + t].values[c]);
    }
    // First and last frames are both at rest, so their difference is the
    // full ramp: 0.3 of the 60-degree range.
    const double rise = frames[149].values[c] - frames[0].values[c];
    CHECK(rise == doctest::Approx(0.3 * 60.0).epsilon(1e-9));
  }
}

TEST_CASE("drift offsets only the drift channel and holds after its phase") {
  Schedule schedule = {Phase{PhaseKind::rest, 30}, Phase{PhaseKind::movement, 30},
                       Phase{PhaseKind::rest, 30}, Phase{PhaseKind::movement, 30}};
  SynthProfile drifted = small_profile(schedule);
  drifted.drift_channel = 5;
  drifted.drift_phase = 2;
  REQUIRE(drifted.drift_fraction == 0.25);
  SynthProfile flat = drifted;
  flat.drift_channel = -1;

  const std::vector<StreamFrame> with = synthesize(drifted, 51);
  const std::vector<StreamFrame> without = synthesize(flat, 51);
  REQUIRE(with.size() == 120);

  const double range = drifted.channels[5].max - drifted.channels[5].min;
  const double offset = drifted.drift_fraction * range;
  for (std::size_t t = 0; t < 120; ++t) {
    for (std::size_t c = 0; c < drifted.channels.size(); ++c) {
      if (c == 5) continue;
      REQUIRE(with[t].values[c] == without[t].values[c]);  // bitwise
    }
    const double base = without[t].values[5];
    if (t < 60) {
      REQUIRE(with[t].values[5] == base);  // no drift before its phase
    } else if (t < 90) {
      const double ramp01 = static_cast<double>(t - 60 + 1) / 30.0;
      REQUIRE(with[t].values[5] == base + offset * ramp01);
    } else {
      REQUIRE(with[t].values[5] == base + offset);  // held at full scale
    }
  }
  // The ramp reaches full scale exactly at the last step of the drift phase.
  CHECK(with[89].values[5] == without[89].values[5] + offset);
}

TEST_CASE("normalize maps channel ranges onto the unit interval") {
  const std::vector<ChannelMeta> meta = {ChannelMeta{"a", -2.0, 2.0, ChannelGroup::position},
                                         ChannelMeta{"b", 0.0, 5.0, ChannelGroup::pressure}};
  StreamFrame frame;
  frame.values = {0.0, 2.5};
  CHECK(normalize(frame, meta) == std::vector<double>{0.5, 0.5});

  frame.values = {-2.0, 0.0};
  CHECK(normalize(frame, meta) == std::vector<double>{0.0, 0.0});

  // The top of the range and anything beyond clamp just below 1 so binary
  // feature coders keep a valid half-open domain.
  frame.values = {2.0, 17.0};
  const std::vector<double> top = normalize(frame, meta);
  CHECK(top[0] == 1.0 - 1e-9);
  CHECK(top[1] == 1.0 - 1e-9);

  frame.values = {-100.0, -0.001};
  const std::vector<double> bottom = normalize(frame, meta);
  CHECK(bottom[0] == 0.0);
  CHECK(bottom[1] == 0.0);

  frame.values = {0.0};
  CHECK_THROWS_AS(normalize(frame, meta), DataError);
}

TEST_CASE("stuck injection replaces channels with unit-mean noise") {
  // 30000 frames x 2 injected channels = 60000 draws; enough to pin the
  // sample moments tightly.
  std::vector<StreamFrame> frames(30000);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    frames[t].index = static_cast<std::int64_t>(t);
    frames[t].values = {0.0, 1.0, 2.0, 3.0};
  }
  const FailureSpec spec = FailureSpec::stuck({2, 0}, 99);
  CHECK(spec.kind == FailureKind::stuck);
  CHECK(spec.noise_mean == 1.0);
  CHECK(spec.noise_std == 0.5);

  const std::vector<StreamFrame> out = inject_failure(frames, spec, 4);
  REQUIRE(out.size() == frames.size());

  std::vector<double> samples;
  samples.reserve(2 * frames.size());
  std::size_t distinct = 0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    samples.push_back(out[t].values[0]);
    samples.push_back(out[t].values[2]);
    if (out[t].values[0] != out[t].values[2]) ++distinct;
    // Untouched channels pass through bit-identical, inputs stay intact.
    REQUIRE(out[t].values[1] == 1.0);
    REQUIRE(out[t].values[3] == 3.0);
    REQUIRE(frames[t].values[0] == 0.0);
    REQUIRE(frames[t].values[2] == 2.0);
  }
  CHECK(mean_of(samples) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std_of(samples) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(distinct == out.size());  // independent draws per channel

  // Same spec, same draws.
  const std::vector<StreamFrame> again = inject_failure(frames, spec, 4);
  for (std::size_t t = 0; t < out.size(); ++t) {
    REQUIRE(again[t].values == out[t].values);
  }
}

TEST_CASE("broken injection floods channels with wide zero-mean noise") {
  std::vector<StreamFrame> frames(100000);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    frames[t].index = static_cast<std::int64_t>(t);
    frames[t].values = {0.25, 0.75};
  }
  const FailureSpec spec = FailureSpec::broken({1}, 7);
  CHECK(spec.kind == FailureKind::broken);
  CHECK(spec.noise_mean == 0.0);
  CHECK(spec.noise_std == 10.0);

  const std::vector<StreamFrame> out = inject_failure(frames, spec, 2);
  std::vector<double> samples;
  samples.reserve(frames.size());
  for (const StreamFrame& f : out) {
    REQUIRE(f.values[0] == 0.25);
    samples.push_back(f.values[1]);
  }
  CHECK(std::abs(mean_of(samples)) < 0.15);
  CHECK(std_of(samples) == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("failure specs reject bad channel sets") {
  CHECK_THROWS_AS(FailureSpec::stuck({}, 0).validate(4), ConfigError);
  CHECK_THROWS_AS(FailureSpec::stuck({4}, 0).validate(4), ConfigError);
  CHECK_THROWS_AS(FailureSpec::stuck({1, 1}, 0).validate(4), ConfigError);

  FailureSpec bad = FailureSpec::stuck({0}, 0);
  bad.noise_std = -1.0;
  CHECK_THROWS_AS(bad.validate(4), ConfigError);

  // Frames narrower than the declared channel count are data errors.
  std::vector<StreamFrame> frames(1);
  frames[0].values = {1.0, 2.0};
  CHECK_THROWS_AS(inject_failure(frames, FailureSpec::stuck({0}, 0), 3), DataError);
}

TEST_CASE("stream CSV round trip preserves every bit") {
  const SynthProfile p =
      small_profile({Phase{PhaseKind::rest, 7}, Phase{PhaseKind::movement, 9}});
  const std::vector<StreamFrame> frames = synthesize(p, 61);
  const std::filesystem::path path = temp_file("tdhorde_test_stream.csv");
  write_stream_csv(path, frames, p.channels);

  const std::vector<StreamFrame> back = load_stream_csv(path, p.channels);
  REQUIRE(back.size() == frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    CHECK(back[t].index == frames[t].index);
    CHECK(back[t].timestamp_s == frames[t].timestamp_s);
    REQUIRE(back[t].values == frames[t].values);  // %.17g round-trips doubles exactly
  }
  std::filesystem::remove(path);
}

TEST_CASE("meta CSV round trip preserves names ranges and groups") {
  const std::vector<ChannelMeta> meta = default_channel_meta();
  const std::filesystem::path path = temp_file("tdhorde_test_meta.csv");
  write_meta_csv(path, meta);

  const std::vector<ChannelMeta> back = load_meta_csv(path);
  REQUIRE(back.size() == meta.size());
  for (std::size_t c = 0; c < meta.size(); ++c) {
    CHECK(back[c].name == meta[c].name);
    CHECK(back[c].min == meta[c].min);
    CHECK(back[c].max == meta[c].max);
    CHECK(back[c].group == meta[c].group);
  }
  std::filesystem::remove(path);
}

TEST_CASE("stream loader rejects malformed files with the offending line") {
  const std::vector<ChannelMeta> meta = {ChannelMeta{"a", 0.0, 1.0, ChannelGroup::other},
                                         ChannelMeta{"b", 0.0, 1.0, ChannelGroup::other}};
  const std::filesystem::path path = temp_file("tdhorde_test_bad_stream.csv");

  auto message_of = [&](const std::string& text) {
    write_text(path, text);
    try {
      load_stream_csv(path, meta);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("<no error>");
  };

  CHECK(message_of("").find("empty file") != std::string::npos);
  CHECK(message_of("timestamp_s,a\n").find("header has 2 columns, expected 3") !=
        std::string::npos);
  CHECK(message_of("time,a,b\n").find("first header column must be 'timestamp_s'") !=
        std::string::npos);
  CHECK(message_of("timestamp_s,a,c\n").find("meta expects 'b'") != std::string::npos);

  const std::string short_row = message_of("timestamp_s,a,b\n0,0.5,0.5\n1,0.5\n");
  CHECK(short_row.find(":3:") != std::string::npos);
  CHECK(short_row.find("row has 2 columns") != std::string::npos);

  const std::string bad_cell = message_of("timestamp_s,a,b\n0,0.5,oops\n");
  CHECK(bad_cell.find(":2:") != std::string::npos);
  CHECK(bad_cell.find("not a number: 'oops'") != std::string::npos);

  CHECK_THROWS_AS(load_stream_csv(temp_file("tdhorde_test_does_not_exist.csv"), meta),
                  DataError);
  std::filesystem::remove(path);
}

TEST_CASE("meta loader rejects malformed files") {
  const std::filesystem::path path = temp_file("tdhorde_test_bad_meta.csv");

  auto message_of = [&](const std::string& text) {
    write_text(path, text);
    try {
      load_meta_csv(path);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("<no error>");
  };

  CHECK(message_of("name,min,max\n").find("expected header 'name,min,max,group'") !=
        std::string::npos);
  CHECK(message_of("name,min,max,group\na,0,1\n").find(":2:") != std::string::npos);
  CHECK(message_of("name,min,max,group\na,0,x,other\n").find("not a number: 'x'") !=
        std::string::npos);
  CHECK(message_of("name,min,max,group\na,0,1,sonar\n").find("unknown channel group: 'sonar'") !=
        std::string::npos);
  CHECK(message_of("name,min,max,group\na,2,1,other\n").find("min < max") != std::string::npos);
  CHECK(message_of("name,min,max,group\na,0,1,other\na,0,1,other\n")
            .find("duplicate channel name") != std::string::npos);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
