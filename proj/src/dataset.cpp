#include "irlv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace irlv {

Dataset::Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels,
                 std::vector<Position> positions, std::optional<FeatureStats> stats)
    : dim_(dim),
      features_(std::move(features)),
      labels_(std::move(labels)),
      positions_(std::move(positions)),
      stats_(std::move(stats)) {
  if (dim_ == 0) throw std::invalid_argument("dataset dimension must be positive");
  if (features_.size() != dim_ * labels_.size() || positions_.size() != labels_.size())
    throw std::invalid_argument("dataset arrays have inconsistent sizes");
  for (int t : labels_)
    if (t != 0 && t != 1) throw std::invalid_argument("labels must be 0 or 1");
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw std::out_of_range("dataset slice out of range");
  const auto f0 = features_.begin() + static_cast<std::ptrdiff_t>(first * dim_);
  const auto l0 = labels_.begin() + static_cast<std::ptrdiff_t>(first);
  const auto p0 = positions_.begin() + static_cast<std::ptrdiff_t>(first);
  const auto n = static_cast<std::ptrdiff_t>(count);
  return {dim_,
          {f0, f0 + n * static_cast<std::ptrdiff_t>(dim_)},
          {l0, l0 + n},
          {p0, p0 + n},
          stats_};
}

Dataset generate_dataset(const Scenario& scenario, std::span<const ShadowingField> fields,
                         const ChannelParams& params, std::size_t count, double p0,
                         std::uint64_t seed) {
  if (count < 2) throw std::invalid_argument("dataset needs at least 2 samples");
  if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("p0 must lie in (0, 1)");
  const std::size_t dim = scenario.base_stations().size();
  const auto n_inside = static_cast<std::size_t>(std::floor(p0 * static_cast<double>(count)));

  std::vector<Position> positions(count);
  std::vector<int> labels(count);
  std::vector<double> features(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    const Region region = i < n_inside ? Region::A0 : Region::A1;
    positions[i] = sample_uniform(scenario, region, rng);
    labels[i] = region == Region::A0 ? 0 : 1;
    attenuation_into(scenario, fields, params, positions[i], {features.data() + i * dim, dim});
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(seed, count));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  std::vector<Position> pos_out(count);
  std::vector<int> lab_out(count);
  std::vector<double> feat_out(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t src = order[i];
    pos_out[i] = positions[src];
    lab_out[i] = labels[src];
    std::copy_n(features.begin() + static_cast<std::ptrdiff_t>(src * dim), dim,
                feat_out.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  return {dim, std::move(feat_out), std::move(lab_out), std::move(pos_out)};
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(dataset.size())));
  if (n_train == 0 || n_train == dataset.size())
    throw std::invalid_argument("split leaves an empty side");
  return {dataset.slice(0, n_train), dataset.slice(n_train, dataset.size() - n_train)};
}

FeatureStats compute_stats(const Dataset& dataset) {
  const std::size_t dim = dataset.dim();
  const auto n = static_cast<double>(dataset.size());
  FeatureStats stats{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (std::size_t i = 0; i < dataset.size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) stats.mean[k] += dataset.sample(i)[k];
  for (double& m : stats.mean) m /= n;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = dataset.sample(i)[k] - stats.mean[k];
      stats.stddev[k] += d * d;
    }
  for (std::size_t k = 0; k < dim; ++k) {
    stats.stddev[k] = std::sqrt(stats.stddev[k] / n);
    if (!(stats.stddev[k] > 1e-12 * std::max(1.0, std::abs(stats.mean[k]))))
      throw std::invalid_argument("feature " + std::to_string(k) + " has zero variance");
  }
  return stats;
}

namespace {

template <typename Map>
Dataset transform(const Dataset& dataset, const FeatureStats& stats, Map map,
                  std::optional<FeatureStats> keep) {
  if (stats.mean.size() != dataset.dim() || stats.stddev.size() != dataset.dim())
    throw std::invalid_argument("normalization stats dimension mismatch");
  std::vector<double> out(dataset.features().begin(), dataset.features().end());
  for (std::size_t i = 0; i < dataset.size(); ++i)
    for (std::size_t k = 0; k < dataset.dim(); ++k) {
      double& v = out[i * dataset.dim() + k];
      v = map(v, stats.mean[k], stats.stddev[k]);
    }
  return {dataset.dim(),
          std::move(out),
          {dataset.labels().begin(), dataset.labels().end()},
          {dataset.positions().begin(), dataset.positions().end()},
          std::move(keep)};
}

}  // namespace

Dataset apply_stats(const Dataset& dataset, const FeatureStats& stats) {
  return transform(
      dataset, stats, [](double v, double m, double s) { return (v - m) / s; }, stats);
}

Dataset invert_stats(const Dataset& dataset, const FeatureStats& stats) {
  return transform(
      dataset, stats, [](double v, double m, double s) { return v * s + m; }, std::nullopt);
}

Dataset normalize(const Dataset& train) { return apply_stats(train, compute_stats(train)); }

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  for (std::size_t k = 0; k < dataset.dim(); ++k) out << 'a' << (k + 1) << ',';
  out << "label,x,y\n";
  char buf[32];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.sample(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    const Position p = dataset.positions()[i];
    out << dataset.labels()[i] << ',';
    std::snprintf(buf, sizeof buf, "%.17g", p.x);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", p.y);
    out << buf << '\n';
  }
}

}  // namespace irlv
