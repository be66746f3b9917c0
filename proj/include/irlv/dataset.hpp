#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "irlv/channel.hpp"
#include "irlv/geometry.hpp"

namespace irlv {

/// Per-feature affine normalization computed from a training set.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Labeled attenuation vectors stored sample-major: features()[i * dim + k] is
/// feature k of sample i. Positions are kept for diagnostics only.
class Dataset {
 public:
  Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels,
          std::vector<Position> positions, std::optional<FeatureStats> stats = std::nullopt);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> features() const { return features_; }
  std::span<const double> sample(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
  std::span<const int> labels() const { return labels_; }
  std::span<const Position> positions() const { return positions_; }
  const std::optional<FeatureStats>& stats() const { return stats_; }
  std::size_t count_label(int label) const;

  /// Copy of the samples [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const;

 private:
  std::size_t dim_;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<Position> positions_;
  std::optional<FeatureStats> stats_;
};

/// floor(p0 * S) samples uniform over A0 (label 0), the rest uniform over A1
/// (label 1), shuffled. Sample i draws from its own substream of `seed`.
Dataset generate_dataset(const Scenario& scenario, std::span<const ShadowingField> fields,
                         const ChannelParams& params, std::size_t count, double p0,
                         std::uint64_t seed);

/// First floor(train_frac * S) samples form the training part.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_frac);

/// Standardizes each feature with this set's own statistics and stores them.
/// Throws std::invalid_argument naming a zero-variance feature.
Dataset normalize(const Dataset& train);
FeatureStats compute_stats(const Dataset& dataset);
Dataset apply_stats(const Dataset& dataset, const FeatureStats& stats);
Dataset invert_stats(const Dataset& dataset, const FeatureStats& stats);

/// Header `a1,...,aN,label,x,y`, one row per sample.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);

}  // namespace irlv
