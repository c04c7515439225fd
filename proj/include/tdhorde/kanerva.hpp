#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "tdhorde/feature.hpp"

namespace tdhorde {

struct CoderConfig {
  std::uint32_t dimension = 0;        // number of channels d
  std::uint32_t prototype_count = 0;  // n
  double active_ratio = 0.0;          // eta in (0, 1]
  std::uint64_t seed = 0;

  /// k = ceil(n * eta), the fixed number of active features per encode.
  std::uint32_t active_count() const;
  void validate() const;  // throws ConfigError
};

/// Selective Kanerva coder. Holds n prototype points uniform in [0,1)^d and
/// maps an observation to the k nearest prototypes under squared Euclidean
/// distance, ties broken toward the lower prototype index.
///
/// Prototypes are sampled row-major (prototype by prototype, coordinate by
/// coordinate) from one Rng seeded with config.seed, so equal configs build
/// bit-identical coders. Immutable after construction; encode is const and
/// safe to call from multiple threads.
class KanervaCoder {
 public:
  explicit KanervaCoder(const CoderConfig& config);

  // Copies share the (immutable) point set; the call counter restarts from
  // the copied value. Spelled out because the atomic member blocks defaults.
  KanervaCoder(const KanervaCoder& other)
      : config_(other.config_),
        active_count_(other.active_count_),
        points_(other.points_),
        encode_calls_(other.encode_calls_.load(std::memory_order_relaxed)) {}
  KanervaCoder& operator=(const KanervaCoder& other) {
    config_ = other.config_;
    active_count_ = other.active_count_;
    points_ = other.points_;
    encode_calls_.store(other.encode_calls_.load(std::memory_order_relaxed),
                        std::memory_order_relaxed);
    return *this;
  }

  /// Cheap copy sharing the same prototype points but selecting a different
  /// number of nearest neighbours. Lets sweeps reuse one point set across
  /// the eta axis.
  KanervaCoder with_active_ratio(double eta) const;

  FeatureVector encode(std::span<const double> observation) const;

  std::uint32_t dimension() const { return config_.dimension; }
  std::uint32_t prototype_count() const { return config_.prototype_count; }
  std::uint32_t active_count() const { return active_count_; }
  const CoderConfig& config() const { return config_; }

  /// Coordinates of prototype i (d values).
  std::span<const double> prototype(std::uint32_t i) const;

  /// Number of encode calls served so far (diagnostic; relaxed counter).
  std::uint64_t encode_calls() const { return encode_calls_.load(std::memory_order_relaxed); }

  /// Persists the point set as raw little-endian doubles, n rows * d columns.
  void save_prototypes(const std::filesystem::path& path) const;
  /// Loads a point set persisted by save_prototypes; config supplies shape.
  static KanervaCoder load_prototypes(const std::filesystem::path& path, const CoderConfig& config);

 private:
  KanervaCoder(const CoderConfig& config, std::shared_ptr<const std::vector<double>> points);

  CoderConfig config_;
  std::uint32_t active_count_ = 0;
  std::shared_ptr<const std::vector<double>> points_;  // row-major n*d
  mutable std::atomic<std::uint64_t> encode_calls_{0};
};

}  // namespace tdhorde
