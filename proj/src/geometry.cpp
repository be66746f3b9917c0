#include "irlv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace irlv {

double distance(Position p, Position q) { return std::hypot(p.x - q.x, p.y - q.y); }

Rectangle::Rectangle(Position min, Position max) : min_(min), max_(max) {
  if (!(std::isfinite(min.x) && std::isfinite(min.y) && std::isfinite(max.x) &&
        std::isfinite(max.y)))
    throw std::invalid_argument("rectangle corners must be finite");
  if (!(min.x < max.x && min.y < max.y))
    throw std::invalid_argument("rectangle requires min < max on both axes");
}

double Rectangle::distance_to(Position p) const {
  const double dx = std::max({min_.x - p.x, 0.0, p.x - max_.x});
  const double dy = std::max({min_.y - p.y, 0.0, p.y - max_.y});
  return std::hypot(dx, dy);
}

double Rectangle::max_distance_to(Position p) const {
  const double dx = std::max(std::abs(p.x - min_.x), std::abs(p.x - max_.x));
  const double dy = std::max(std::abs(p.y - min_.y), std::abs(p.y - max_.y));
  return std::hypot(dx, dy);
}

// ---------------------------------------------------------------------------

StreetScenario::StreetScenario(Layout layout, Rectangle roi, std::vector<Position> base_stations)
    : layout_(layout),
      roi_(roi),
      base_stations_(std::move(base_stations)),
      horizontal_({0.0, layout.building_side_m},
                  {layout.map_side_m, layout.building_side_m + layout.street_width_m}),
      vertical_({layout.building_side_m, 0.0},
                {layout.building_side_m + layout.street_width_m, layout.map_side_m}) {
  const double expected = 2.0 * layout.building_side_m + layout.street_width_m;
  if (std::abs(expected - layout.map_side_m) > 1e-9 * layout.map_side_m)
    throw std::invalid_argument("map side must equal 2*building side + street width");
  const Rectangle lower_left({0.0, 0.0}, {layout.building_side_m, layout.building_side_m});
  if (!lower_left.contains(roi_))
    throw std::invalid_argument("roi must lie inside the lower-left building");
  if (base_stations_.empty()) throw std::invalid_argument("at least one base station required");
  for (const Position& bs : base_stations_)
    if (!bounds().contains(bs)) throw std::invalid_argument("base station outside the map");
}

StreetScenario StreetScenario::standard() {
  const Layout layout{};
  return {layout, default_roi(layout), default_base_stations(layout)};
}

Rectangle StreetScenario::default_roi(const Layout& layout) {
  const double half = layout.building_side_m / 2;
  return {{half, half}, {layout.building_side_m, layout.building_side_m}};
}

std::vector<Position> StreetScenario::default_base_stations(const Layout& layout) {
  const double mid = layout.building_side_m + layout.street_width_m / 2;
  const double arm = layout.building_side_m / 2;
  const double far_arm = layout.map_side_m - arm;
  return {{arm, mid}, {far_arm, mid}, {mid, arm}, {mid, far_arm}, {mid, mid}};
}

StreetScenario StreetScenario::with_base_stations(std::vector<Position> base_stations) const {
  return {layout_, roi_, std::move(base_stations)};
}

Rectangle StreetScenario::bounds() const {
  return {{0.0, 0.0}, {layout_.map_side_m, layout_.map_side_m}};
}

bool StreetScenario::los(Position ue, std::size_t bs) const {
  const Position b = base_stations_[bs];
  return (horizontal_.contains(b) && horizontal_.contains(ue)) ||
         (vertical_.contains(b) && vertical_.contains(ue));
}

// ---------------------------------------------------------------------------

CircularScenario::CircularScenario(double r_out, Rectangle roi) : r_out_(r_out), roi_(roi) {
  if (!(r_out > 0.0)) throw std::invalid_argument("r_out must be positive");
  if (roi_.max_distance_to(center_) > r_out_)
    throw std::invalid_argument("roi must lie inside the outer circle");
  if (roi_.distance_to(center_) <= 0.0)
    throw std::invalid_argument("roi must not contain the base station");
}

CircularScenario CircularScenario::with_nearest_corner(double r_out, double width, double height,
                                                       double r_min) {
  const double c = r_min / std::numbers::sqrt2;
  return {r_out, Rectangle({c, -c - height}, {c + width, -c})};
}

Rectangle CircularScenario::bounds() const { return {{-r_out_, -r_out_}, {r_out_, r_out_}}; }

bool CircularScenario::contains(Position p) const { return std::hypot(p.x, p.y) <= r_out_; }

double CircularScenario::area() const { return std::numbers::pi * r_out_ * r_out_; }

// ---------------------------------------------------------------------------

int in_roi(const Scenario& scenario, Position pos) {
  if (!scenario.contains(pos)) throw std::out_of_range("out of map");
  return scenario.roi().contains(pos) ? 0 : 1;
}

bool is_los(const Scenario& scenario, Position ue, std::size_t bs_index) {
  if (bs_index >= scenario.base_stations().size())
    throw std::out_of_range("base station index " + std::to_string(bs_index) + " out of range");
  return scenario.los(ue, bs_index);
}

Position sample_uniform(const Scenario& scenario, Region region, Rng& rng) {
  const Rectangle box = region == Region::A0 ? scenario.roi() : scenario.bounds();
  constexpr int kMaxAttempts = 1'000'000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Position p{uniform(rng, box.min().x, box.max().x), uniform(rng, box.min().y, box.max().y)};
    if (!scenario.contains(p)) continue;
    const bool inside = scenario.roi().contains(p);
    if (region == Region::Whole || (region == Region::A0) == inside) return p;
  }
  throw NumericError("degenerate sampling region");
}

double region_area(const Scenario& scenario, Region region) {
  switch (region) {
    case Region::A0: return scenario.roi().area();
    case Region::A1: return scenario.area() - scenario.roi().area();
    case Region::Whole: return scenario.area();
  }
  return 0.0;
}

}  // namespace irlv
