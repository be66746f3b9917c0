#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "irlv/common.hpp"

namespace irlv {

/// Point on the map plane, meters.
struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(Position p, Position q);

/// Axis-aligned closed rectangle.
class Rectangle {
 public:
  Rectangle(Position min, Position max);

  Position min() const { return min_; }
  Position max() const { return max_; }
  double width() const { return max_.x - min_.x; }
  double height() const { return max_.y - min_.y; }
  double area() const { return width() * height(); }
  Position centroid() const { return {(min_.x + max_.x) / 2, (min_.y + max_.y) / 2}; }

  /// Boundary points are inside.
  bool contains(Position p) const {
    return p.x >= min_.x && p.x <= max_.x && p.y >= min_.y && p.y <= max_.y;
  }
  bool contains(const Rectangle& r) const { return contains(r.min_) && contains(r.max_); }

  /// Distance from p to the nearest point of the rectangle (0 inside).
  double distance_to(Position p) const;
  /// Distance from p to the farthest corner.
  double max_distance_to(Position p) const;

  friend bool operator==(const Rectangle&, const Rectangle&) = default;

 private:
  Position min_;
  Position max_;
};

/// Sampling regions: A0 is the region of interest, A1 its complement in the map.
enum class Region { A0, A1, Whole };

/// Map geometry shared by the street and circular layouts. Immutable.
class Scenario {
 public:
  virtual ~Scenario() = default;

  /// Bounding box of the map; the shadowing grid covers it.
  virtual Rectangle bounds() const = 0;
  virtual bool contains(Position p) const = 0;
  virtual double area() const = 0;
  virtual const Rectangle& roi() const = 0;
  virtual std::span<const Position> base_stations() const = 0;
  /// Precondition: bs < base_stations().size().
  virtual bool los(Position ue, std::size_t bs) const = 0;
};

/// Square map with four corner buildings separated by a cross of streets.
class StreetScenario final : public Scenario {
 public:
  struct Layout {
    double map_side_m = 525.0;
    double building_side_m = 255.0;
    double street_width_m = 15.0;
  };

  StreetScenario(Layout layout, Rectangle roi, std::vector<Position> base_stations);

  /// 525/255/15 map, ROI in the lower-left building, five base stations.
  static StreetScenario standard();
  /// Quadrant of the lower-left building that touches both streets.
  static Rectangle default_roi(const Layout& layout);
  /// Midpoints of the four street arms followed by the map center.
  static std::vector<Position> default_base_stations(const Layout& layout);

  StreetScenario with_base_stations(std::vector<Position> base_stations) const;

  const Layout& layout() const { return layout_; }
  const Rectangle& horizontal_street() const { return horizontal_; }
  const Rectangle& vertical_street() const { return vertical_; }

  Rectangle bounds() const override;
  bool contains(Position p) const override { return bounds().contains(p); }
  double area() const override { return layout_.map_side_m * layout_.map_side_m; }
  const Rectangle& roi() const override { return roi_; }
  std::span<const Position> base_stations() const override { return base_stations_; }
  /// A base station sees every point of each street it stands in; one at the
  /// intersection sees both streets. Base stations inside buildings have no LOS.
  bool los(Position ue, std::size_t bs) const override;

 private:
  Layout layout_;
  Rectangle roi_;
  std::vector<Position> base_stations_;
  Rectangle horizontal_;
  Rectangle vertical_;
};

/// Disc of radius r_out with a single base station at its center, LOS everywhere.
class CircularScenario final : public Scenario {
 public:
  CircularScenario(double r_out, Rectangle roi);

  /// ROI of the given size whose upper-left corner is its nearest point to the
  /// center, placed along the lower-right diagonal at distance r_min.
  static CircularScenario with_nearest_corner(double r_out, double width, double height,
                                              double r_min);

  double r_out() const { return r_out_; }
  /// Distance from the center to the nearest ROI point.
  double r_min() const { return roi_.distance_to({0.0, 0.0}); }

  Rectangle bounds() const override;
  bool contains(Position p) const override;
  double area() const override;
  const Rectangle& roi() const override { return roi_; }
  std::span<const Position> base_stations() const override { return {&center_, 1}; }
  bool los(Position, std::size_t) const override { return true; }

 private:
  double r_out_;
  Rectangle roi_;
  Position center_{0.0, 0.0};
};

/// Label convention: 0 inside A0 (closed set), 1 elsewhere in the map.
/// Throws std::out_of_range("out of map") for positions outside the map.
int in_roi(const Scenario& scenario, Position pos);

/// Throws std::out_of_range for an invalid base-station index.
bool is_los(const Scenario& scenario, Position ue, std::size_t bs_index);

/// Uniform position in the requested region by rejection over its bounding box.
Position sample_uniform(const Scenario& scenario, Region region, Rng& rng);

double region_area(const Scenario& scenario, Region region);

}  // namespace irlv
