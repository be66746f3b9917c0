#include "irlv/np_oracle.hpp"

#include "irlv/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace irlv {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SectorGeometry::SectorGeometry(CircularScenario scenario, double resolution)
    : scenario_(std::move(scenario)) {
  if (!(resolution > 0.0 && resolution <= 1e-3))
    throw std::invalid_argument("angular resolution must lie in (0, 1e-3]");
  const auto steps = static_cast<long>(std::ceil(kTwoPi / resolution));
  step_ = kTwoPi / static_cast<double>(steps);

  const Rectangle& roi = scenario_.roi();
  const Position origin{0.0, 0.0};
  r_near_ = roi.distance_to(origin);
  r_far_ = roi.max_distance_to(origin);

  // The ROI excludes the origin, so it fits in the wedge spanned by its corners.
  const Position c = roi.centroid();
  const double center = std::atan2(c.y, c.x);
  double lo = 0.0;
  double hi = 0.0;
  for (Position p : {roi.min(), roi.max(), Position{roi.min().x, roi.max().y},
                     Position{roi.max().x, roi.min().y}}) {
    const double d = std::remainder(std::atan2(p.y, p.x) - center, kTwoPi);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const auto k_lo = static_cast<long>(std::floor((center + lo) / step_ - 0.5)) - 1;
  const auto k_hi = static_cast<long>(std::ceil((center + hi) / step_ - 0.5)) + 1;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double phi = (static_cast<double>(k) + 0.5) * step_;
    cos_.push_back(std::cos(phi));
    sin_.push_back(std::sin(phi));
  }
}

double SectorGeometry::alpha(double r) const {
  if (!(r >= r_near_ && r <= r_far_)) return 0.0;
  const Rectangle& roi = scenario_.roi();
  std::size_t inside = 0;
  for (std::size_t k = 0; k < cos_.size(); ++k) inside += roi.contains({r * cos_[k], r * sin_[k]});
  return static_cast<double>(inside) * step_;
}

double radius_from_linear_attenuation(double a_lin, const ChannelParams& params) {
  if (!(a_lin >= 1.0)) throw std::domain_error("attenuation below free-space minimum");
  return params.speed_of_light * a_lin / (4.0 * std::numbers::pi * params.carrier_hz);
}

double radius_from_attenuation(double a_db, const ChannelParams& params) {
  return radius_from_linear_attenuation(std::pow(10.0, a_db / 20.0), params);
}

double pdf_r(double r, Hypothesis h, const SectorGeometry& geometry) {
  if (!(r > 0.0 && r <= geometry.scenario().r_out())) return 0.0;
  const double a = geometry.alpha(r);
  return h == Hypothesis::H0 ? r * a / geometry.roi_area()
                             : r * (kTwoPi - a) / geometry.outside_area();
}

double llr_at_radius(double r, const SectorGeometry& geometry) {
  const double a = geometry.alpha(r);
  if (a <= 0.0) return -kLlrSaturation;
  if (a >= kTwoPi) return kLlrSaturation;
  const double ratio = geometry.outside_area() * a / (geometry.roi_area() * (kTwoPi - a));
  return std::clamp(std::log2(ratio), -kLlrSaturation, kLlrSaturation);
}

double llr(double a_db, const SectorGeometry& geometry, const ChannelParams& params) {
  return llr_at_radius(radius_from_attenuation(a_db, params), geometry);
}

double llr_linear(double a_lin, const SectorGeometry& geometry, const ChannelParams& params) {
  return llr_at_radius(radius_from_linear_attenuation(a_lin, params), geometry);
}

int np_decide(double a_db, double theta, const SectorGeometry& geometry,
              const ChannelParams& params) {
  if (!(theta >= 0.0)) throw std::invalid_argument("theta must be nonnegative");
  return llr(a_db, geometry, params) >= std::log2(theta) ? 0 : 1;
}

double posterior_h1(double a_db, double prior0, const SectorGeometry& geometry,
                    const ChannelParams& params) {
  return 1.0 - posterior_from_llr(llr(a_db, geometry, params), prior0, 1.0 - prior0);
}

std::vector<double> default_theta_grid(double log2_min, double log2_max, double log2_step) {
  std::vector<double> grid{0.0};
  const auto n = static_cast<std::size_t>(std::floor((log2_max - log2_min) / log2_step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i)
    grid.push_back(std::exp2(log2_min + log2_step * static_cast<double>(i)));
  grid.push_back(std::numeric_limits<double>::infinity());
  return grid;
}

NpRoc np_roc(const SectorGeometry& geometry, const ChannelParams& params, std::size_t n_samples,
             std::span<const double> thetas, std::uint64_t seed) {
  if (n_samples < 10'000) throw std::invalid_argument("np_roc needs at least 10^4 samples per class");
  const CircularScenario& scenario = geometry.scenario();
  auto sample_llrs = [&](Region region, std::uint64_t stream) {
    Rng rng(derive_seed(seed, stream));
    std::vector<double> out(n_samples);
    for (double& v : out) {
      const Position p = sample_uniform(scenario, region, rng);
      const double d = std::max(distance(p, {0.0, 0.0}), kMinLinkDistance);
      v = llr(path_loss_los_db(d, params), geometry, params);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const std::vector<double> inside = sample_llrs(Region::A0, 0);
  const std::vector<double> outside = sample_llrs(Region::A1, 1);
  const auto n = static_cast<double>(n_samples);

  NpRoc result;
  std::vector<RocPoint> points;
  for (double theta : thetas) {
    if (!(theta >= 0.0)) throw std::invalid_argument("theta must be nonnegative");
    const double t = std::log2(theta);
    // Declared outside when llr < log2(theta).
    const auto fa = std::lower_bound(inside.begin(), inside.end(), t) - inside.begin();
    const auto md = outside.end() - std::lower_bound(outside.begin(), outside.end(), t);
    const ThresholdRocPoint p{theta, static_cast<double>(fa) / n, static_cast<double>(md) / n};
    result.sweep.push_back(p);
    points.push_back({p.p_fa, p.p_md});
  }
  result.curve = RocCurve(std::move(points));
  return result;
}

void write_threshold_roc_csv(std::ostream& out, std::span<const ThresholdRocPoint> sweep) {
  out << "theta,p_fa,p_md\n";
  char buf[96];
  for (const ThresholdRocPoint& p : sweep) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.theta, p.p_fa, p.p_md);
    out << buf;
  }
}

}  // namespace irlv
