#pragma once

#include <cstdint>
#include <vector>

#include "tdhorde/errors.hpp"

namespace tdhorde {

/// Sparse binary feature vector: the sorted indices of the active prototypes
/// out of a logical length of `length`. Every Kanerva encode produces exactly
/// ceil(n * eta) active indices.
struct FeatureVector {
  std::uint32_t length = 0;
  std::vector<std::uint32_t> active;  // strictly increasing, all < length

  /// Throws DataError if indices are out of range, unsorted or duplicated.
  void validate() const {
    std::uint32_t prev = 0;
    bool first = true;
    for (std::uint32_t i : active) {
      if (i >= length) throw DataError("feature index out of range");
      if (!first && i <= prev) throw DataError("feature indices not strictly increasing");
      prev = i;
      first = false;
    }
  }
};

}  // namespace tdhorde
