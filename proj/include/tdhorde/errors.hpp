#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tdhorde {

/// Invalid configuration (bad ranges, inconsistent shapes). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or missing input data (CSV parse errors, shape mismatches).
/// CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A learner produced a non-finite value. The run is aborted and the fault
/// recorded; sweeps mark the cell as diverged instead of crashing.
/// CLI exit code 4.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what, std::int64_t gvf_index = -1,
                           std::int64_t step = -1)
      : std::runtime_error(what), gvf_index_(gvf_index), step_(step) {}

  /// Index of the GVF whose learner diverged, or -1 when unknown.
  std::int64_t gvf_index() const noexcept { return gvf_index_; }
  /// Update step at which the fault was detected, or -1 when unknown.
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t gvf_index_;
  std::int64_t step_;
};

/// An internal state invariant was violated (e.g. a normalizer entry went
/// negative). Indicates a bug in this library, not bad user input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace tdhorde
