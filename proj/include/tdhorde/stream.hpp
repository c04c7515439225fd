#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tdhorde {

enum class ChannelGroup { position, velocity, load, temperature, accel, pressure, other };

const char* group_name(ChannelGroup group);
ChannelGroup parse_group(const std::string& name);  // throws DataError

struct ChannelMeta {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  ChannelGroup group = ChannelGroup::other;
};

/// Throws DataError unless every channel has min < max and a non-empty,
/// unique name.
void validate_meta(const std::vector<ChannelMeta>& meta);

struct StreamFrame {
  std::int64_t index = 0;
  double timestamp_s = 0.0;
  std::vector<double> values;  // raw channel readings
};

enum class PhaseKind { rest, movement };

struct Phase {
  PhaseKind kind = PhaseKind::rest;
  std::uint32_t steps = 0;
};

using Schedule = std::vector<Phase>;

/// Start step of each phase plus one final entry holding the total step
/// count, so phase p spans [boundaries[p], boundaries[p+1]).
std::vector<std::int64_t> phase_boundaries(const Schedule& schedule);

enum class FailureKind { stuck, broken };

struct FailureSpec {
  FailureKind kind = FailureKind::stuck;
  std::vector<std::uint32_t> channels;
  double noise_mean = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  /// Stuck sensors read Gaussian noise around their last plausible value:
  /// N(1, 0.5).
  static FailureSpec stuck(std::vector<std::uint32_t> channels, std::uint64_t seed);
  /// Broken sensors read wide zero-centered noise: N(0, 10).
  static FailureSpec broken(std::vector<std::uint32_t> channels, std::uint64_t seed);

  void validate(std::uint32_t channel_count) const;  // throws ConfigError
};

/// Synthetic stand-in for a multi-joint manipulator recording: alternating
/// rest and movement phases over grouped sensor channels. Rest phases hold
/// per-channel constants plus small Gaussian jitter; movement phases play a
/// per-channel sum of 2-3 seeded sinusoids that repeats every
/// pattern_period_s. Temperature channels additionally climb monotonically
/// over the whole run, and one load channel can drift mid-run and hold the
/// offset afterwards.
struct SynthProfile {
  std::vector<ChannelMeta> channels;
  Schedule schedule;
  double step_period_s = 0.265;
  double pattern_period_s = 100.0;
  double rest_noise_fraction = 1e-3;        // jitter sigma as a fraction of range
  double movement_noise_fraction = 0.0;     // measurement noise during movement
  double temperature_rise_fraction = 0.3;   // total ramp as a fraction of range
  std::int32_t drift_channel = -1;          // -1 disables the drift
  std::uint32_t drift_phase = 4;            // phase during which the drift ramps in
  double drift_fraction = 0.25;             // final drift offset as a fraction of range

  void validate() const;  // throws ConfigError
};

/// 108 channels in six groups: 17 position, 17 velocity, 17 load,
/// 17 temperature, 15 accel, 25 pressure.
std::vector<ChannelMeta> default_channel_meta();

/// The four channels belonging to the elbow joint (position, velocity, load,
/// temperature of joint 1), used by the failure-injection studies.
std::vector<std::uint32_t> default_elbow_channels();

/// The load channel that drifts in the default profile.
std::uint32_t default_drift_channel();

/// Default profile: the 108-channel meta and six alternating 5-minute
/// rest/movement phases at 0.265 s per step (1132 steps per phase).
SynthProfile default_synth_profile();

/// Deterministic generation: (profile, seed) fully determines the stream.
std::vector<StreamFrame> synthesize(const SynthProfile& profile, std::uint64_t seed);

/// Per-channel affine map to [0, 1): clamp((raw - min)/(max - min), 0, 1 - 1e-9).
/// Out-of-range readings (failure noise, drift) clamp rather than error.
std::vector<double> normalize(const StreamFrame& frame, const std::vector<ChannelMeta>& meta);

/// Replaces every listed channel in every frame with an independent draw
/// from N(noise_mean, noise_std^2); all other channels pass through
/// bit-identical. Draw order is frame-major, channel-ascending.
std::vector<StreamFrame> inject_failure(const std::vector<StreamFrame>& frames,
                                        const FailureSpec& spec, std::uint32_t channel_count);

/// Stream CSV: header "timestamp_s,<name>,...", one row per frame, %.17g
/// numbers (exact double round-trip).
std::vector<StreamFrame> load_stream_csv(const std::filesystem::path& path,
                                         const std::vector<ChannelMeta>& meta);
void write_stream_csv(const std::filesystem::path& path, const std::vector<StreamFrame>& frames,
                      const std::vector<ChannelMeta>& meta);

/// Channel meta CSV: header "name,min,max,group".
std::vector<ChannelMeta> load_meta_csv(const std::filesystem::path& path);
void write_meta_csv(const std::filesystem::path& path, const std::vector<ChannelMeta>& meta);

}  // namespace tdhorde
