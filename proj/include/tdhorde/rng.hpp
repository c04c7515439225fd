#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tdhorde {

/// Splits a 64-bit value into an independent-looking one (SplitMix64 finalizer).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a sub-seed for a named purpose (stream noise, failure noise, ...)
/// from a trial seed, so one seed deterministically fans out to every
/// consumer without correlated streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

/// Deterministic random source used everywhere the engine needs randomness.
///
/// std::mt19937_64 is fully specified by the standard; the uniform and
/// gaussian mappings below are written out explicitly instead of using
/// std::uniform_real_distribution / std::normal_distribution, whose output
/// sequences are implementation-defined. Prototype sets, synthetic streams
/// and failure noise are therefore reproducible from their seeds across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, bound) by rejection-free modulo reduction over a
  /// 64-bit draw; bias is negligible for the small bounds used here.
  std::uint64_t below(std::uint64_t bound) { return gen_() % bound; }

  /// Gaussian via Box-Muller; the second variate of each pair is cached.
  double gaussian(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tdhorde
