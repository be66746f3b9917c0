#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "irlv/geometry.hpp"

namespace irlv {

struct ChannelParams {
  double carrier_hz = 2.12e9;
  double sigma_db = 8.0;
  double decorrelation_m = 75.0;
  double bs_height_m = 15.0;
  double speed_of_light = 299792458.0;
  /// Shadowing grid spacing; must not exceed decorrelation_m / 5.
  double grid_spacing_m = 5.0;

  void validate() const;
};

/// Free-space LOS path loss, 20 log10(4 pi f0 d / c). Throws for d <= 0.
double path_loss_los_db(double d, const ChannelParams& params);

/// Macro-cell NLOS path loss with the carrier expressed in MHz. Throws for d <= 0.
double path_loss_nlos_db(double d, const ChannelParams& params);

/// Zero-mean Gaussian shadowing map (dB) on a regular grid, row-major with x
/// varying fastest. Covariance between nodes at distance L is
/// sigma^2 exp(-L / d_c).
class ShadowingField {
 public:
  ShadowingField(Position origin, double spacing, std::size_t nx, std::size_t ny,
                 std::vector<double> values, double sigma_db, double decorrelation_m,
                 std::uint64_t seed);

  Position origin() const { return origin_; }
  double spacing() const { return spacing_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double sigma_db() const { return sigma_db_; }
  double decorrelation_m() const { return decorrelation_m_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> values() const { return values_; }

  double node(std::size_t ix, std::size_t iy) const { return values_[iy * nx_ + ix]; }
  Position node_position(std::size_t ix, std::size_t iy) const {
    return {origin_.x + spacing_ * static_cast<double>(ix),
            origin_.y + spacing_ * static_cast<double>(iy)};
  }

  friend bool operator==(const ShadowingField&, const ShadowingField&) = default;

 private:
  Position origin_;
  double spacing_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<double> values_;
  double sigma_db_;
  double decorrelation_m_;
  std::uint64_t seed_;
};

/// Samples one field covering `extent`. Uses circulant embedding with FFTs; grids
/// of at most 2500 nodes are factorized densely instead. Deterministic per seed.
/// Throws std::invalid_argument("grid too coarse for d_c") when the spacing
/// exceeds d_c / 5.
ShadowingField generate_shadowing_field(const Rectangle& extent, const ChannelParams& params,
                                        std::uint64_t seed);

/// One independent field per base station of the scenario.
std::vector<ShadowingField> generate_shadowing_fields(const Scenario& scenario,
                                                      const ChannelParams& params,
                                                      std::uint64_t seed);

/// Bilinear interpolation of the grid. Throws std::out_of_range outside the grid.
double shadowing_at(const ShadowingField& field, Position pos);

/// Per-base-station attenuation in dB: LOS or NLOS path loss plus shadowing.
/// Distances below 1 m are evaluated at 1 m.
std::vector<double> attenuation_vector(const Scenario& scenario,
                                       std::span<const ShadowingField> fields,
                                       const ChannelParams& params, Position ue);

/// Same as attenuation_vector, writing into `out` (size N_AP).
void attenuation_into(const Scenario& scenario, std::span<const ShadowingField> fields,
                      const ChannelParams& params, Position ue, std::span<double> out);

inline constexpr double kMinLinkDistance = 1.0;

/// Sums of v(p) v(p + m h) over node pairs m steps apart along x and along y,
/// for m = 0..max_lag_nodes. Adds into `sums` and `counts` (resized as needed).
void accumulate_lag_products(const ShadowingField& field, std::size_t max_lag_nodes,
                             std::vector<double>& sums, std::vector<std::uint64_t>& counts);

// Field files. CSV: a header line with origin, spacing and dimensions followed by
// one row of nx values per grid row. Binary: fixed little-endian layout.
void write_field_csv(std::ostream& out, const ShadowingField& field);
ShadowingField read_field_csv(std::istream& in);
void write_field_binary(std::ostream& out, const ShadowingField& field);
ShadowingField read_field_binary(std::istream& in);

}  // namespace irlv
