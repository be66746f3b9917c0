#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "irlv/channel.hpp"
#include "irlv/evaluation.hpp"
#include "irlv/geometry.hpp"

namespace irlv {

/// Saturation value (bits) standing in for an infinite log-likelihood ratio.
inline constexpr double kLlrSaturation = 1024.0;

enum class Hypothesis { H0, H1 };

/// Angular measure of the ROI seen on circles around the base station of a
/// circular scenario, computed by scanning directions at a fixed resolution.
class SectorGeometry {
 public:
  explicit SectorGeometry(CircularScenario scenario, double resolution = 1e-4);

  const CircularScenario& scenario() const { return scenario_; }
  double resolution() const { return step_; }
  double roi_area() const { return scenario_.roi().area(); }
  double outside_area() const { return scenario_.area() - scenario_.roi().area(); }
  /// Distance to the farthest ROI corner; alpha vanishes beyond it.
  double r_far() const { return r_far_; }

  /// Total angle (radians) of directions whose point at radius r lies in the ROI.
  double alpha(double r) const;

 private:
  CircularScenario scenario_;
  double step_;
  double r_near_;
  double r_far_;
  std::vector<double> cos_;  // directions within the ROI's angular wedge
  std::vector<double> sin_;
};

/// Inverse of the LOS path loss: c * 10^(a/20) / (4 pi f0). Throws when the
/// attenuation is below the free-space minimum (linear value < 1).
double radius_from_attenuation(double a_db, const ChannelParams& params);
double radius_from_linear_attenuation(double a_lin, const ChannelParams& params);

/// Radial density of the UE distance under each hypothesis; zero outside (0, r_out].
double pdf_r(double r, Hypothesis h, const SectorGeometry& geometry);

/// log2 p(r|H0) / p(r|H1) at a given distance, saturated at +-kLlrSaturation.
double llr_at_radius(double r, const SectorGeometry& geometry);
double llr(double a_db, const SectorGeometry& geometry, const ChannelParams& params);
double llr_linear(double a_lin, const SectorGeometry& geometry, const ChannelParams& params);

/// 0 (inside) when llr >= log2(theta), otherwise 1.
int np_decide(double a_db, double theta, const SectorGeometry& geometry,
              const ChannelParams& params);

/// Posterior p(H1 | a) for the given training prior of H0.
double posterior_h1(double a_db, double prior0, const SectorGeometry& geometry,
                    const ChannelParams& params);

struct ThresholdRocPoint {
  double theta = 0.0;
  double p_fa = 0.0;
  double p_md = 0.0;
};

struct NpRoc {
  std::vector<ThresholdRocPoint> sweep;
  RocCurve curve;
};

/// Thresholds 2^k for k on a uniform grid in [log2_min, log2_max], preceded by
/// 0 and followed by +infinity.
std::vector<double> default_theta_grid(double log2_min = -30.0, double log2_max = 5.0,
                                       double log2_step = 0.005);

/// Monte-Carlo NP ROC from n_samples uniform UE positions in each of A0 and A1.
/// Requires n_samples >= 10^4.
NpRoc np_roc(const SectorGeometry& geometry, const ChannelParams& params, std::size_t n_samples,
             std::span<const double> thetas, std::uint64_t seed);

/// CSV with header `theta,p_fa,p_md`.
void write_threshold_roc_csv(std::ostream& out, std::span<const ThresholdRocPoint> sweep);

}  // namespace irlv
