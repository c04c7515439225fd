#include "tdhorde/kanerva.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tdhorde/errors.hpp"
#include "tdhorde/rng.hpp"

namespace tdhorde {

std::uint32_t CoderConfig::active_count() const {
  return static_cast<std::uint32_t>(
      std::ceil(static_cast<double>(prototype_count) * active_ratio));
}

void CoderConfig::validate() const {
  if (dimension == 0) throw ConfigError("coder dimension must be >= 1");
  if (prototype_count == 0) throw ConfigError("prototype count must be >= 1");
  if (!(active_ratio > 0.0) || active_ratio > 1.0)
    throw ConfigError("active ratio must be in (0, 1]");
  const std::uint32_t k = active_count();
  if (k < 1 || k > prototype_count)
    throw ConfigError("active count ceil(n*eta) must be in [1, n]");
}

KanervaCoder::KanervaCoder(const CoderConfig& config) : config_(config) {
  config_.validate();
  active_count_ = config_.active_count();

  auto points = std::make_shared<std::vector<double>>();
  points->reserve(static_cast<std::size_t>(config_.prototype_count) * config_.dimension);
  Rng rng(config_.seed);
  for (std::uint32_t p = 0; p < config_.prototype_count; ++p) {
    for (std::uint32_t j = 0; j < config_.dimension; ++j) {
      points->push_back(rng.uniform01());
    }
  }
  points_ = std::move(points);
}

KanervaCoder::KanervaCoder(const CoderConfig& config,
                           std::shared_ptr<const std::vector<double>> points)
    : config_(config), points_(std::move(points)) {
  config_.validate();
  active_count_ = config_.active_count();
}

KanervaCoder KanervaCoder::with_active_ratio(double eta) const {
  CoderConfig cfg = config_;
  cfg.active_ratio = eta;
  return KanervaCoder(cfg, points_);
}

std::span<const double> KanervaCoder::prototype(std::uint32_t i) const {
  return {points_->data() + static_cast<std::size_t>(i) * config_.dimension,
          config_.dimension};
}

FeatureVector KanervaCoder::encode(std::span<const double> observation) const {
  const std::uint32_t d = config_.dimension;
  const std::uint32_t n = config_.prototype_count;
  if (observation.size() != d)
    throw DataError("observation has " + std::to_string(observation.size()) +
                    " coordinates, coder expects " + std::to_string(d));
  for (double v : observation) {
    if (!(v >= 0.0 && v < 1.0))
      throw DataError("observation coordinate outside [0, 1)");
  }
  encode_calls_.fetch_add(1, std::memory_order_relaxed);

  std::vector<double> dist(n);
  const double* pts = points_->data();
  for (std::uint32_t p = 0; p < n; ++p) {
    const double* row = pts + static_cast<std::size_t>(p) * d;
    double acc = 0.0;
    for (std::uint32_t j = 0; j < d; ++j) {
      const double diff = observation[j] - row[j];
      acc += diff * diff;
    }
    dist[p] = acc;
  }

  // k smallest under the total order (distance, index); the index component
  // makes ties deterministic across platforms.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  const std::uint32_t k = active_count_;
  auto closer = [&dist](std::uint32_t a, std::uint32_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  if (k < n) std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), closer);

  FeatureVector out;
  out.length = n;
  out.active.assign(order.begin(), order.begin() + k);
  std::sort(out.active.begin(), out.active.end());
  return out;
}

void KanervaCoder::save_prototypes(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  const std::size_t count = points_->size();
  const std::size_t written = std::fwrite(points_->data(), sizeof(double), count, f);
  std::fclose(f);
  if (written != count) throw DataError("short write to " + path.string());
}

KanervaCoder KanervaCoder::load_prototypes(const std::filesystem::path& path,
                                           const CoderConfig& config) {
  config.validate();
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) throw DataError("cannot open " + path.string());
  const std::size_t count =
      static_cast<std::size_t>(config.prototype_count) * config.dimension;
  auto points = std::make_shared<std::vector<double>>(count);
  const std::size_t read = std::fread(points->data(), sizeof(double), count, f);
  const bool extra = std::fgetc(f) != EOF;
  std::fclose(f);
  if (read != count || extra)
    throw DataError(path.string() + " does not hold exactly n*d doubles");
  return KanervaCoder(config, std::move(points));
}

}  // namespace tdhorde
